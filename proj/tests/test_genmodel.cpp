#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "dsiscan/genmodel.hpp"
#include "dsiscan/rng.hpp"
#include "dsiscan/spectral.hpp"

using namespace dsiscan;

namespace {

double kolmogorov(const std::vector<double>& sorted_draws,
                  const std::vector<double>& cdf_at_draws) {
  double worst = 0.0;
  const double n = static_cast<double>(sorted_draws.size());
  for (std::size_t i = 0; i < sorted_draws.size(); ++i) {
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    worst = std::max(worst, std::fabs(cdf_at_draws[i] - lo));
    worst = std::max(worst, std::fabs(cdf_at_draws[i] - hi));
  }
  return worst;
}

double hill_exponent(std::vector<double> values, std::size_t k) {
  std::sort(values.begin(), values.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(values[i] / values[k]);
  return static_cast<double>(k) / acc;
}

}  // namespace

TEST_CASE("parameter validation") {
  GrowthModelParams p;
  p.n = 1.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p.n = 3.0;
  p.gamma = 0.4;  // gamma*n >= 1
  CHECK_THROWS_AS(p.validate(), InputError);
  p.gamma = 0.01;
  p.w1 = 1.5;  // |w1| >= w0
  CHECK_THROWS_AS(p.validate(), InputError);
  p.w1 = 0.3;
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("Boltzmann sampler has exponential statistics") {
  const auto sample = sample_boltzmann(1.0, 100000, 5);
  REQUIRE(sample.size() == 100000);
  double mean = 0.0;
  for (const auto& e : sample.entries) {
    CHECK(e.size_usd > 0.0);
    mean += e.size_usd;
  }
  mean /= static_cast<double>(sample.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(sample_boltzmann(0.0, 10, 5), InputError);
  // Inverse-CDF check at the distribution level: P(S <= 2) for T0 = 2 should
  // equal 1 - e^{-1}.
  const auto t2 = sample_boltzmann(2.0, 100000, 6);
  std::size_t below = 0;
  for (const auto& e : t2.entries) below += e.size_usd <= 2.0 ? 1 : 0;
  CHECK(static_cast<double>(below) / 100000.0 ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("Tsallis sampler matches the analytic CDF and tail") {
  GrowthModelParams params;
  params.n = 2.0;
  params.T0 = 1.0;
  const auto sample = sample_tsallis(params, 50000, 7);
  std::vector<double> draws;
  for (const auto& e : sample.entries) draws.push_back(e.size_usd);
  std::sort(draws.begin(), draws.end());
  std::vector<double> cdf(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    cdf[i] = 1.0 - std::pow(1.0 + draws[i] / 2.0, -1.0);  // n=2, T0=1
  }
  CHECK(kolmogorov(draws, cdf) <= 1.36 / std::sqrt(50000.0) * 3.0);
  CHECK(hill_exponent(draws, 400) == doctest::Approx(1.0).epsilon(0.1));
  // Median: u = 0.5 gives S = n*T0*((0.5)^{-1/(n-1)} - 1) = 2.
  CHECK(draws[draws.size() / 2] == doctest::Approx(2.0).epsilon(0.05));

  GrowthModelParams bad;
  bad.n = 1.0;
  CHECK_THROWS_AS(sample_tsallis(bad, 10, 7), InputError);
}

TEST_CASE("samplers are seed-reproducible") {
  const auto a = sample_tsallis(GrowthModelParams{}, 100, 42);
  const auto b = sample_tsallis(GrowthModelParams{}, 100, 42);
  const auto c = sample_tsallis(GrowthModelParams{}, 100, 43);
  REQUIRE(a.size() == b.size());
  bool all_equal = true, any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_equal &= a.entries[i].size_usd == b.entries[i].size_usd;
    any_diff |= a.entries[i].size_usd != c.entries[i].size_usd;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("complex exponents follow the closed form") {
  const auto exps = complex_exponents(0.1, 3.0, 3);
  REQUIRE(exps.size() == 4);
  const double expected_re = -std::log(1.0 - 0.3) / std::log(1.1);
  const double slope = 2.0 * M_PI / std::log(1.1);
  for (const auto& e : exps) {
    CHECK(e.real_part == doctest::Approx(expected_re).epsilon(1e-12));
    CHECK(std::fabs(e.imag_part - slope * e.k) <=
          1e-9 * (1.0 + std::fabs(slope * e.k)));
  }
  CHECK(exps[1].imag_part == doctest::Approx(65.93).epsilon(0.001));

  // gamma -> 0 limit: the real part reduces to n.
  for (double n : {1.5, 2.0, 3.0, 6.0, 8.0}) {
    const auto tiny = complex_exponents(1e-8, n, 0);
    CHECK(std::fabs(tiny[0].real_part - n) <= 1e-5);
  }
  // Second-order expansion n + (n/2)(n+1)*gamma + O(gamma^2).
  const double g = 0.01, n = 2.0;
  const auto mid = complex_exponents(g, n, 0);
  const double expansion = n + 0.5 * n * (n + 1.0) * g;
  CHECK(std::fabs(mid[0].real_part - expansion) <= n * n * n * g * g + 1e-12);

  CHECK_THROWS_AS(complex_exponents(0.4, 3.0, 1), InputError);
  CHECK_THROWS_AS(complex_exponents(0.1, 0.9, 1), InputError);
}

TEST_CASE("predicted frequency identities") {
  CHECK(predict_omega(0.014, 100) == doctest::Approx(4.52).epsilon(0.005));
  CHECK(predict_omega(0.0014, 1000) == doctest::Approx(4.49).epsilon(0.005));
  CHECK(predict_omega(std::exp(1.0) - 1.0, 1) ==
        doctest::Approx(2.0 * M_PI).epsilon(1e-12));
  for (int gi = 0; gi < 10; ++gi) {
    const double gamma = 1e-4 * std::pow(900.0, gi / 9.0);
    for (int ki : {1, 2, 8, 64, 1024}) {
      const double omega = predict_omega(gamma, ki);
      CHECK(std::fabs(omega * ki * std::log1p(gamma) - 2.0 * M_PI) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(predict_omega(0.0, 10), InputError);
}

TEST_CASE("log-periodic density normalization and limits") {
  GrowthModelParams params;
  params.n = 2.0;
  params.T0 = 1.0;
  params.gamma = 0.01;
  params.kappa = 1;
  params.w0 = 1.0;
  params.w1 = 0.0;

  SUBCASE("w1 = 0 matches the analytic truncated power law") {
    const auto den = logperiodic_pdf(params, 1.0, 1e6, 16384);
    CHECK(integrate_density(den) == doctest::Approx(1.0).epsilon(1e-6));
    const double m = params.exponent_m();
    // Analytic normalization of S^{-m} on [1, 1e6].
    const double z =
        (std::pow(1e6, 1.0 - m) - std::pow(1.0, 1.0 - m)) / (1.0 - m);
    for (std::size_t i = 0; i < den.ln_grid.size(); i += 512) {
      const double s = std::exp(den.ln_grid[i]);
      CHECK(den.values[i] ==
            doctest::Approx(std::pow(s, -m) / z).epsilon(1e-8));
    }
  }

  SUBCASE("gamma -> 0 converges to the pure S^{-n} law") {
    params.gamma = 1e-6;
    const auto den = logperiodic_pdf(params, 1.0, 1e4, 8192);
    const double z = (std::pow(1e4, -1.0) - 1.0) / (-1.0);  // exponent n = 2
    for (std::size_t i = 0; i < den.ln_grid.size(); i += 256) {
      const double s = std::exp(den.ln_grid[i]);
      CHECK(den.values[i] ==
            doctest::Approx(std::pow(s, -2.0) / z).epsilon(1e-4));
    }
  }

  SUBCASE("oscillating density carries its design frequency") {
    const auto target = GrowthModelParams::from_target(2.0, 4.6, 100, 1.0, 1.0, 0.3);
    const auto den = logperiodic_pdf(target, 1e6, 1e11, 8192);
    // ln density minus the power-law trend is a pure cosine in ln S.
    std::vector<double> y(den.values.size());
    for (std::size_t i = 0; i < den.values.size(); ++i) {
      y[i] = std::log(den.values[i]);
    }
    y = detrend_poly(den.ln_grid, y, 1);
    const auto omegas = default_omega_grid(
        den.ln_grid.back() - den.ln_grid.front(), 8.0, 512);
    const auto pg = lomb(den.ln_grid, y, omegas);
    const auto peak = std::max_element(pg.powers.begin(), pg.powers.end()) -
                      pg.powers.begin();
    CHECK(std::fabs(pg.omegas[peak] - 4.6) <= 0.05);
  }

  params.w1 = 1.5;
  CHECK_THROWS_AS(logperiodic_pdf(params, 1.0, 1e6), InputError);
  params.w1 = 0.0;
  CHECK_THROWS_AS(logperiodic_pdf(params, 10.0, 1.0), InputError);
}

TEST_CASE("from_target hits the requested exponent and frequency") {
  const auto p = GrowthModelParams::from_target(2.0, 4.6, 100, 1.0, 1.0, 0.3);
  CHECK(p.exponent_m() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(predict_omega(p.gamma, p.kappa) == doctest::Approx(4.6).epsilon(1e-10));
}

TEST_CASE("log-periodic sampler fidelity") {
  GrowthModelParams params;
  params.n = 2.0;
  params.T0 = 1.0;
  params.gamma = 1e-9;  // exponent m ~ 2 -> CCDF exponent 1
  params.w1 = 0.0;

  CHECK(sample_logperiodic(params, 1.0, 1e6, 0, 9).size() == 0);

  const auto sample = sample_logperiodic(params, 1.0, 1e6, 100000, 9);
  std::vector<double> draws;
  for (const auto& e : sample.entries) {
    CHECK(e.size_usd >= 1.0);
    CHECK(e.size_usd <= 1e6);
    draws.push_back(e.size_usd);
  }
  CHECK(hill_exponent(draws, 500) == doctest::Approx(1.0).epsilon(0.1));

  // Kolmogorov distance against the tabulated CDF (truncated Pareto here).
  std::sort(draws.begin(), draws.end());
  std::vector<double> cdf(draws.size());
  const double z = 1.0 - 1e-6;  // 1 - (1/s_max)
  for (std::size_t i = 0; i < draws.size(); ++i) {
    cdf[i] = (1.0 - 1.0 / draws[i]) / z;
  }
  CHECK(kolmogorov(draws, cdf) <= 0.01);
}

TEST_CASE("evolution operator basics") {
  GrowthModelParams params;
  params.n = 3.0;
  params.T0 = 1.0;
  params.gamma = 0.014;

  GridDensity initial;
  const int m = 20000;
  for (int i = 0; i < m; ++i) {
    const double t = 13.8 * i / (m - 1);
    initial.ln_grid.push_back(t);
    // 2 * S^{-3}: unit mass on [1, e^{13.8}] up to truncation.
    initial.values.push_back(2.0 * std::exp(-3.0 * t));
  }

  SUBCASE("zero steps is the identity") {
    const auto same = evolve_distribution(params, initial, 0);
    for (std::size_t i = 0; i < initial.values.size(); ++i) {
      CHECK(same.values[i] == initial.values[i]);
    }
  }

  SUBCASE("one step scales a power law per the asymptotic relation") {
    const auto evolved = evolve_distribution(params, initial, 1, false);
    // P(S(1+gamma) + gamma*n*T0) = (1 - gamma*n) P(S) for S >> T0.
    for (double s = 150.0; s < 4e5; s *= 2.0) {
      const double arg = std::log(s * 1.014 + 0.042);
      // Locate by interpolation on the evolved grid.
      const auto it = std::lower_bound(evolved.ln_grid.begin(),
                                       evolved.ln_grid.end(), arg);
      const auto k = static_cast<std::size_t>(it - evolved.ln_grid.begin());
      REQUIRE(k > 0);
      REQUIRE(k < evolved.ln_grid.size());
      const double f =
          (arg - evolved.ln_grid[k - 1]) /
          (evolved.ln_grid[k] - evolved.ln_grid[k - 1]);
      const double value =
          evolved.values[k - 1] * (1.0 - f) + evolved.values[k] * f;
      const double expected = (1.0 - 0.042) * 2.0 * std::pow(s, -3.0);
      CHECK(value == doctest::Approx(expected).epsilon(0.01));
    }
  }

  SUBCASE("renormalized evolution keeps unit mass") {
    const auto evolved = evolve_distribution(params, initial, 5);
    CHECK(integrate_density(evolved) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("coarse grids are rejected") {
    GridDensity coarse;
    for (int i = 0; i < 32; ++i) {
      coarse.ln_grid.push_back(13.8 * i / 31.0);
      coarse.values.push_back(std::exp(-3.0 * coarse.ln_grid.back()));
    }
    CHECK_THROWS_AS(evolve_distribution(params, coarse, 100), InputError);
  }
}

TEST_CASE("integrate_density uses the dS measure") {
  GridDensity den;
  // density 1/S on [1, e]: integral of (1/S) dS = 1 over that range.
  const int m = 4096;
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    den.ln_grid.push_back(t);
    den.values.push_back(std::exp(-t));
  }
  CHECK(integrate_density(den) == doctest::Approx(1.0).epsilon(1e-6));
}
