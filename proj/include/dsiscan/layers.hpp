#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsiscan/density.hpp"
#include "dsiscan/types.hpp"

namespace dsiscan {

struct LayerPartition {
  // Upper bounds ub_i in USD, strictly increasing; layer i covers
  // (ub_{i-1}, ub_i], the lowest layer starts at 0 and the top layer is
  // unbounded above.
  std::vector<double> boundaries;
  std::map<std::string, int> assignments;  // entity_id -> layer index, 1-based
  std::vector<double> ratios;              // ub_i / ub_{i-1}

  int layer_count() const { return static_cast<int>(boundaries.size()) + 1; }
  int layer_of(double size_usd) const;
};

struct LayerStatsRow {
  int layer = 0;
  std::size_t count = 0;
  double mean_holdings = 0.0;
  double upper_bound = 0.0;  // +inf for the top layer
  double ratio_to_previous = 0.0;  // 0 when undefined
};

struct LayerStats {
  std::vector<LayerStatsRow> rows;
  double mean_ratio = 0.0;
  std::vector<std::string> entities_without_holdings;
};

// Boundaries are density minima on the ln grid, greedily filtered from the
// smallest size upward so consecutive boundary ratios stay within
// [target/(1+tol), target*(1+tol)]; adjacent qualifying minima resolve to
// the deeper one.
LayerPartition partition_from_density(const DensityEstimate& estimate,
                                      double target_ratio, double tolerance);

LayerPartition assign(const SizeSample& sample,
                      const std::vector<double>& boundaries);

LayerStats layer_stats(const LayerPartition& partition,
                       const HoldingsTable& holdings);

}  // namespace dsiscan
