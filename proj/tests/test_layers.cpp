#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "dsiscan/density.hpp"
#include "dsiscan/layers.hpp"

using namespace dsiscan;

namespace {

// Density tabulated as a sum of Gaussians in ln-size.
DensityEstimate bump_density(const std::vector<double>& centers, double lo,
                             double hi, int points = 2048,
                             double width = 0.28) {
  DensityEstimate est;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    double v = 0.0;
    for (double c : centers) {
      const double z = (x - c) / width;
      v += std::exp(-0.5 * z * z);
    }
    est.grid.push_back(x);
    est.density.push_back(v);
  }
  return est;
}

SizeSample make_sample(const std::vector<double>& sizes) {
  SizeSample s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    s.entries.push_back({"e" + std::to_string(i), sizes[i]});
  }
  return s;
}

}  // namespace

TEST_CASE("unimodal density yields a single layer") {
  const auto part = partition_from_density(bump_density({3.0}, 0.0, 6.0),
                                           3.5, 0.35);
  CHECK(part.boundaries.empty());
  CHECK(part.layer_count() == 1);
  CHECK(part.layer_of(1.0) == 1);
  CHECK(part.layer_of(1e12) == 1);
}

TEST_CASE("three-bump mixture splits into three layers at density minima") {
  const std::vector<double> centers = {1.0, 2.25, 3.5};
  const auto est = bump_density(centers, 0.0, 4.5);
  const auto part = partition_from_density(est, 3.5, 0.35);
  REQUIRE(part.boundaries.size() == 2);
  CHECK(part.layer_count() == 3);

  // Oracle: brute-force argmin of the tabulated density between bump centers.
  for (std::size_t b = 0; b < 2; ++b) {
    double best_x = 0.0, best_v = 1e300;
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
      if (est.grid[i] <= centers[b] || est.grid[i] >= centers[b + 1]) continue;
      if (est.density[i] < best_v) {
        best_v = est.density[i];
        best_x = est.grid[i];
      }
    }
    CHECK(std::log(part.boundaries[b]) == doctest::Approx(best_x).epsilon(1e-12));
  }

  REQUIRE(part.ratios.size() == 1);
  CHECK(part.ratios[0] >= 3.5 / 1.35);
  CHECK(part.ratios[0] <= 3.5 * 1.35);
}

TEST_CASE("minima spaced outside the ratio band are filtered") {
  // Gaps of 0.5 in ln size correspond to ratio e^{0.5} ~ 1.65, far below
  // 3.5/(1+0.35): only the deepest of the crowded minima family may survive
  // per band step.
  const auto est = bump_density({1.0, 1.5, 2.0, 2.5, 3.0}, 0.0, 4.0);
  const auto part = partition_from_density(est, 3.5, 0.35);
  for (double r : part.ratios) {
    CHECK(r >= 3.5 / 1.35);
    CHECK(r <= 3.5 * 1.35);
  }
}

TEST_CASE("partition_from_density rejects invalid input") {
  CHECK_THROWS_AS(partition_from_density(DensityEstimate{}, 3.5, 0.35),
                  InputError);
  const auto est = bump_density({1.0}, 0.0, 2.0);
  CHECK_THROWS_AS(partition_from_density(est, 0.0, 0.35), InputError);
  CHECK_THROWS_AS(partition_from_density(est, 3.5, -0.1), InputError);
}

TEST_CASE("assignment against the published boundary ladder") {
  const std::vector<double> boundaries = {9e6,   38e6,  150e6,
                                          430e6, 1500e6, 5000e6};
  SizeSample sample = make_sample(
      {9e6, 9e6 + 1.0, 38e6, 100e6, 430e6 + 1.0, 2e9, 1e12});
  const auto part = assign(sample, boundaries);
  CHECK(part.layer_count() == 7);
  CHECK(part.assignments.at("e0") == 1);  // 9e6 sits in (0, 9e6]
  CHECK(part.assignments.at("e1") == 2);
  CHECK(part.assignments.at("e2") == 2);
  CHECK(part.assignments.at("e3") == 3);
  CHECK(part.assignments.at("e4") == 5);
  CHECK(part.assignments.at("e5") == 6);
  CHECK(part.assignments.at("e6") == 7);

  // Ladder ratios and their mean.
  REQUIRE(part.ratios.size() == 5);
  CHECK(part.ratios[0] == doctest::Approx(38.0 / 9.0));
  CHECK(part.ratios[1] == doctest::Approx(150.0 / 38.0));
  CHECK(part.ratios[2] == doctest::Approx(430.0 / 150.0));
  CHECK(part.ratios[3] == doctest::Approx(1500.0 / 430.0));
  CHECK(part.ratios[4] == doctest::Approx(5000.0 / 1500.0));

  const auto stats = layer_stats(part, HoldingsTable{});
  CHECK(stats.mean_ratio == doctest::Approx(3.5716).epsilon(1e-4));
  CHECK(std::fabs(stats.mean_ratio - 3.6) <= 0.05);

  // Counts cover every assigned entity exactly once.
  std::size_t total = 0;
  for (const auto& row : stats.rows) total += row.count;
  CHECK(total == sample.size());
}

TEST_CASE("assignment is invariant under a common rescaling") {
  const std::vector<double> boundaries = {10.0, 40.0, 160.0};
  const std::vector<double> sizes = {3.0, 10.0, 11.0, 55.0, 200.0};
  const double c = 1.7e4;
  std::vector<double> scaled_b = boundaries, scaled_s = sizes;
  for (double& b : scaled_b) b *= c;
  for (double& s : scaled_s) s *= c;
  const auto base = assign(make_sample(sizes), boundaries);
  const auto scaled = assign(make_sample(scaled_s), scaled_b);
  for (const auto& [entity, layer] : base.assignments) {
    CHECK(scaled.assignments.at(entity) == layer);
  }
}

TEST_CASE("assign validates the boundary ladder") {
  const auto sample = make_sample({1.0, 2.0});
  CHECK_THROWS_AS(assign(sample, {10.0, 10.0}), InputError);
  CHECK_THROWS_AS(assign(sample, {10.0, 5.0}), InputError);
  CHECK_THROWS_AS(assign(sample, {0.0, 5.0}), InputError);
  CHECK_NOTHROW(assign(sample, {}));
}

TEST_CASE("layer stats aggregate distinct holdings per layer") {
  LayerPartition part;
  part.boundaries = {100.0};
  part.ratios = {};
  part.assignments = {{"f1", 1}, {"f2", 1}, {"f3", 2}, {"f4", 2}};

  HoldingsTable holdings;
  holdings.positions = {
      {"f1", "a", 0.5, std::nullopt}, {"f1", "b", 0.5, std::nullopt},
      {"f2", "a", 0.3, std::nullopt}, {"f2", "a", 0.0, std::nullopt},
      {"f3", "a", 0.2, std::nullopt}, {"f3", "b", 0.2, std::nullopt},
      {"f3", "c", 0.2, std::nullopt}, {"f3", "d", 0.2, std::nullopt},
  };
  // f2 lists asset "a" twice: distinct holdings count once. f4 has no rows.
  const auto stats = layer_stats(part, holdings);
  REQUIRE(stats.rows.size() == 2);
  CHECK(stats.rows[0].layer == 1);
  CHECK(stats.rows[0].count == 2);
  CHECK(stats.rows[0].mean_holdings == doctest::Approx((2.0 + 1.0) / 2.0));
  CHECK(stats.rows[0].upper_bound == 100.0);
  CHECK(stats.rows[1].count == 2);
  CHECK(std::isinf(stats.rows[1].upper_bound));
  REQUIRE(stats.entities_without_holdings.size() == 1);
  CHECK(stats.entities_without_holdings[0] == "f4");
}
