#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "dsiscan/density.hpp"
#include "dsiscan/rng.hpp"
#include "dsiscan/spectral.hpp"

using namespace dsiscan;

namespace {

SizeSample from_logs(const std::vector<double>& logs) {
  SizeSample s;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    s.entries.push_back({"e" + std::to_string(i), std::exp(logs[i])});
  }
  return s;
}

double trapezoid(const std::vector<double>& grid,
                 const std::vector<double>& values, double lo, double hi) {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i - 1] < lo || grid[i] > hi) continue;
    acc += 0.5 * (values[i - 1] + values[i]) * (grid[i] - grid[i - 1]);
  }
  return acc;
}

double total_variation(const std::vector<double>& values) {
  double tv = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    tv += std::fabs(values[i] - values[i - 1]);
  }
  return tv;
}

}  // namespace

TEST_CASE("single-point KDE is the kernel itself") {
  const auto est = kde(from_logs({0.0}), 1.0, 129);  // odd grid contains 0
  CHECK(est.grid.front() == doctest::Approx(-4.0));
  CHECK(est.grid.back() == doctest::Approx(4.0));
  const std::size_t mid = est.grid.size() / 2;
  CHECK(est.grid[mid] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(est.density[mid] ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-9));
  CHECK(*std::max_element(est.density.begin(), est.density.end()) ==
        doctest::Approx(est.density[mid]));
}

TEST_CASE("two separated bumps each carry half the mass") {
  const auto est = kde(from_logs({-5.0, 5.0}), 0.1, 1025);
  CHECK(trapezoid(est.grid, est.density, -6.0, 0.0) ==
        doctest::Approx(0.5).epsilon(0.01));
  CHECK(trapezoid(est.grid, est.density, 0.0, 6.0) ==
        doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("KDE integrates to one on the padded grid") {
  const CounterRng rng(21);
  std::vector<double> logs;
  for (int i = 0; i < 479; ++i) logs.push_back(18.7 + 2.24 * rng.normal(i));
  const auto est = kde(from_logs(logs), 0.22, 512);
  CHECK(trapezoid(est.grid, est.density, est.grid.front(), est.grid.back()) ==
        doctest::Approx(1.0).epsilon(0.01));
  for (double v : est.density) CHECK(v >= 0.0);
}

TEST_CASE("KDE input validation") {
  CHECK_THROWS_AS(kde(SizeSample{}, 0.2, 128), InputError);
  CHECK_THROWS_AS(kde(from_logs({1.0}), 0.0, 128), InputError);
  CHECK_THROWS_AS(kde(from_logs({1.0}), 0.2, 32), InputError);
}

TEST_CASE("KDE linearity: union equals the sample-weighted mixture") {
  const CounterRng rng(31);
  std::vector<double> a, b;
  for (int i = 0; i < 60; ++i) a.push_back(rng.normal(i));
  for (int i = 0; i < 40; ++i) b.push_back(2.0 + rng.normal(100 + i));
  std::vector<double> both = a;
  both.insert(both.end(), b.begin(), b.end());
  // Shared evaluation grid.
  std::vector<double> grid;
  for (int i = 0; i < 256; ++i) grid.push_back(-5.0 + 10.0 * i / 255.0);
  const double h = 0.3;
  const auto fa = kde_on_grid(a, h, grid);
  const auto fb = kde_on_grid(b, h, grid);
  const auto fboth = kde_on_grid(both, h, grid);
  const double na = 60, nb = 40;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double mix = (na * fa[i] + nb * fb[i]) / (na + nb);
    CHECK(fboth[i] == doctest::Approx(mix).epsilon(1e-12));
  }
}

TEST_CASE("total variation is nonincreasing in bandwidth") {
  const CounterRng rng(41);
  std::vector<double> logs;
  for (int i = 0; i < 300; ++i) logs.push_back(rng.normal(i));
  std::vector<double> grid;
  for (int i = 0; i < 512; ++i) grid.push_back(-6.0 + 12.0 * i / 511.0);
  double prev_tv = -1.0;
  for (double h : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double tv = total_variation(kde_on_grid(logs, h, grid));
    if (prev_tv >= 0.0) CHECK(tv <= prev_tv + 1e-12);
    prev_tv = tv;
  }
}

TEST_CASE("cross-validated bandwidth matches a brute-force LOO oracle") {
  const CounterRng rng(51);
  const int n = 2000;
  std::vector<double> logs;
  for (int i = 0; i < n; ++i) logs.push_back(rng.normal(i));
  const std::vector<double> candidates = {0.01, 0.2, 5.0};

  // Oracle: leave-one-out log-likelihood, direct double loop.
  double best_ll = -1e300, best_h = 0.0;
  for (double h : candidates) {
    double ll = 0.0;
    const double norm = 1.0 / ((n - 1) * h * std::sqrt(2.0 * M_PI));
    for (int i = 0; i < n; ++i) {
      double f = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double z = (logs[i] - logs[j]) / h;
        f += std::exp(-0.5 * z * z);
      }
      ll += std::log(std::max(f * norm, 1e-300));
    }
    if (ll > best_ll || (ll == best_ll && h > best_h)) {
      best_ll = ll;
      best_h = h;
    }
  }
  CHECK(best_h == 0.2);  // extremes under/over-smooth
  CHECK(select_bandwidth_cv(logs, candidates) == best_h);
}

TEST_CASE("cross-validated bandwidth lands near the known optimum") {
  const CounterRng rng(61);
  std::vector<double> logs;
  for (int i = 0; i < 479; ++i) logs.push_back(18.7 + 2.24 * rng.normal(i));
  std::vector<double> candidates;
  for (int i = 0; i < 10; ++i) {
    candidates.push_back(0.05 * std::pow(20.0, i / 9.0));
  }
  const double h = select_bandwidth_cv(logs, candidates);
  // A smooth lognormal with sigma = 2.24 and N = 479 has its LOO optimum
  // near the Silverman value 1.06*sigma*N^{-1/5} ~ 0.69; accept anything
  // between heavy undersmoothing and the Silverman scale.
  CHECK(h >= 0.1);
  CHECK(h <= 0.8);
}

TEST_CASE("bandwidth CV input validation") {
  std::vector<double> few(5, 1.0);
  CHECK_THROWS_AS(select_bandwidth_cv(few, {0.1, 0.2}), InputError);
  std::vector<double> logs(20, 0.0);
  for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = 0.1 * i;
  CHECK_THROWS_AS(select_bandwidth_cv(logs, {0.1}), InputError);
  CHECK_THROWS_AS(select_bandwidth_cv(logs, {0.1, -0.2}), InputError);
}

TEST_CASE("(H,q)-derivative closed forms") {
  // Build an estimate whose values follow a known function of x = e^t.
  DensityEstimate est;
  est.bandwidth = 0.1;
  const int m = 512;
  for (int i = 0; i < m; ++i) {
    est.grid.push_back(0.0 + 4.0 * i / (m - 1));
  }

  SUBCASE("constant f has zero derivative for every (H,q)") {
    est.density.assign(m, 0.7);
    for (double H : {0.5, 0.9}) {
      for (double q : {0.65, 0.95}) {
        const auto d = hq_derivative(est, H, q);
        REQUIRE(!d.values.empty());
        for (double v : d.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
      }
    }
  }

  SUBCASE("f(x) = x with H = 1 gives exactly 1") {
    for (int i = 0; i < m; ++i) est.density.push_back(std::exp(est.grid[i]));
    for (double q : {0.65, 0.8, 0.95}) {
      const auto d = hq_derivative(est, 1.0, q);
      REQUIRE(!d.values.empty());
      for (double v : d.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
    }
  }

  SUBCASE("f(x) = x with H = 0.5, q = 0.75 gives sqrt(0.25 x)") {
    for (int i = 0; i < m; ++i) est.density.push_back(std::exp(est.grid[i]));
    const auto d = hq_derivative(est, 0.5, 0.75);
    REQUIRE(!d.values.empty());
    for (std::size_t i = 0; i < d.grid.size(); ++i) {
      const double x = std::exp(d.grid[i]);
      CHECK(d.values[i] == doctest::Approx(std::sqrt(0.25 * x)).epsilon(1e-4));
    }
  }
}

TEST_CASE("(H,q)-derivative validation and domain trimming") {
  DensityEstimate est;
  est.bandwidth = 0.1;
  for (int i = 0; i < 128; ++i) est.grid.push_back(i * 0.05);
  est.density.assign(128, 1.0);
  CHECK_THROWS_AS(hq_derivative(est, 0.5, 0.0), InputError);
  CHECK_THROWS_AS(hq_derivative(est, 0.5, 1.0), InputError);
  CHECK_THROWS_AS(hq_derivative(est, 1.5, 0.8), InputError);
  // Points whose shifted argument exits the grid are dropped from the left.
  const auto d = hq_derivative(est, 0.5, 0.65);
  CHECK(d.grid.size() < est.grid.size());
  CHECK(d.grid.front() >= est.grid.front() - std::log(0.65) - 1e-9);
}

TEST_CASE("hq_scan walks the documented 6x6 grid") {
  DensityEstimate est;
  est.bandwidth = 0.1;
  const int m = 256;
  for (int i = 0; i < m; ++i) {
    const double t = 0.0 + 4.0 * i / (m - 1);
    est.grid.push_back(t);
    est.density.push_back(std::exp(2.0 * t));  // f(x) = x^2, monotone
  }
  const auto scan = hq_scan(est);
  REQUIRE(scan.size() == 36);
  std::vector<double> hs, qs;
  for (const auto& d : scan) {
    hs.push_back(d.H);
    qs.push_back(d.q);
    // Monotone increasing f: every interior derivative value positive.
    for (double v : d.values) CHECK(v > 0.0);
  }
  CHECK(*std::min_element(hs.begin(), hs.end()) == doctest::Approx(0.5));
  CHECK(*std::max_element(hs.begin(), hs.end()) == doctest::Approx(0.9));
  CHECK(*std::min_element(qs.begin(), qs.end()) == doctest::Approx(0.65));
  CHECK(*std::max_element(qs.begin(), qs.end()) == doctest::Approx(0.95));
}

TEST_CASE("hq_scan of a constant density is identically zero") {
  DensityEstimate est;
  est.bandwidth = 0.1;
  for (int i = 0; i < 128; ++i) est.grid.push_back(i * 0.05);
  est.density.assign(128, 0.3);
  for (const auto& d : hq_scan(est)) {
    for (double v : d.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("log-periodic frequency survives every (H,q) pair") {
  // f(x) = x^{-m} (1 + 0.3 cos(omega0 ln x)). After dividing out the known
  // power-law envelope of the derivative and removing a smooth trend, the
  // Lomb peak must sit at omega0 for all 36 pairs.
  const double omega0 = 4.6, mexp = 2.0;
  DensityEstimate est;
  est.bandwidth = 0.05;
  const int m = 2048;
  for (int i = 0; i < m; ++i) {
    const double t = 11.5 * i / (m - 1);
    est.grid.push_back(t);
    est.density.push_back(std::exp(-mexp * t) *
                          (1.0 + 0.3 * std::cos(omega0 * t)));
  }
  const auto omegas = default_omega_grid(11.5, 10.0, 512);
  const double bin = omegas[1] - omegas[0];
  for (const auto& d : hq_scan(est)) {
    std::vector<double> y(d.values.size());
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      const double x = std::exp(d.grid[i]);
      // Undo the x^{-m-H} envelope of the derivative of a power law.
      y[i] = d.values[i] * std::pow(x, mexp + d.H);
    }
    y = detrend_poly(d.grid, y, 2);
    const auto pg = lomb(d.grid, y, omegas);
    const auto peak =
        std::max_element(pg.powers.begin(), pg.powers.end()) -
        pg.powers.begin();
    CHECK(std::fabs(pg.omegas[peak] - omega0) <= bin + 1e-12);
  }
}
