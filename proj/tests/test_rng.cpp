#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "dsiscan/rng.hpp"

using dsiscan::CounterRng;
using dsiscan::inverse_normal_cdf;

TEST_CASE("uniform draws lie in the open unit interval and are reproducible") {
  const CounterRng rng(42);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = rng.uniform(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(rng.uniform(i) == u);  // pure function of (seed, stream, i)
  }
  const CounterRng again(42);
  CHECK(again.uniform(123) == rng.uniform(123));
  CHECK(CounterRng(43).uniform(123) != rng.uniform(123));
}

TEST_CASE("draws are order-independent") {
  const CounterRng rng(7);
  std::vector<double> forward, backward;
  for (std::uint64_t i = 0; i < 100; ++i) forward.push_back(rng.uniform(i));
  for (std::uint64_t i = 100; i-- > 0;) backward.push_back(rng.uniform(i));
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(forward[i] == backward[99 - i]);
  }
}

TEST_CASE("next() walks the counter sequence") {
  CounterRng seq(11);
  const CounterRng ref(11);
  CHECK(seq.next() == ref.uniform(0));
  CHECK(seq.next() == ref.uniform(1));
  CHECK(seq.next() == ref.uniform(2));
}

TEST_CASE("substreams are distinct and deterministic") {
  const CounterRng base(5);
  const CounterRng a = base.substream(0);
  const CounterRng b = base.substream(1);
  CHECK(a.uniform(0) != b.uniform(0));
  CHECK(a.uniform(0) == base.substream(0).uniform(0));
  // Nested substreams of different parents stay distinct.
  CHECK(base.substream(0).substream(1).uniform(0) !=
        base.substream(1).substream(0).uniform(0));
}

TEST_CASE("bits are deterministic and well spread") {
  const CounterRng rng(9);
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 512; ++i) seen.insert(rng.bits(i));
  CHECK(seen.size() == 512);  // no collisions in a small batch
}

TEST_CASE("inverse normal CDF hits known quantiles") {
  CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.8413447460685429) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(inverse_normal_cdf(0.9772498680518208) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(inverse_normal_cdf(0.0013498980316300933) ==
        doctest::Approx(-3.0).epsilon(1e-9));
  // Symmetry.
  for (double p : {0.01, 0.1, 0.25, 0.4}) {
    CHECK(inverse_normal_cdf(p) ==
          doctest::Approx(-inverse_normal_cdf(1.0 - p)).epsilon(1e-12));
  }
}

TEST_CASE("normal draws have standard moments") {
  const CounterRng rng(2024);
  const int n = 20000;
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) mean += rng.normal(i);
  mean /= n;
  for (int i = 0; i < n; ++i) {
    const double d = rng.normal(i) - mean;
    var += d * d;
  }
  var /= n;
  CHECK(std::fabs(mean) < 0.03);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}
