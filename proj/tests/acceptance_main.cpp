#include <cstdio>

#include "dsiscan/selftest.hpp"

int main() {
  const auto results = dsiscan::run_acceptance();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("criterion %2d [%s]: %s (%.0f ms) %s\n", r.id,
                r.name.c_str(), r.passed ? "PASS" : "FAIL", r.millis,
                r.detail.c_str());
    if (!r.passed) ++failures;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}
