#include "dsiscan/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dsiscan {

int LayerPartition::layer_of(double size_usd) const {
  // Interval convention (lb, ub]: smallest i with size <= ub_i, else top.
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (size_usd <= boundaries[i]) return static_cast<int>(i) + 1;
  }
  return static_cast<int>(boundaries.size()) + 1;
}

LayerPartition partition_from_density(const DensityEstimate& estimate,
                                      double target_ratio, double tolerance) {
  if (estimate.grid.empty() || estimate.density.empty()) {
    throw InputError("layers: empty density");
  }
  if (!(target_ratio > 0.0)) {
    throw InputError("layers: nonpositive target ratio");
  }
  if (!(tolerance >= 0.0)) throw InputError("layers: negative tolerance");

  struct Minimum {
    double ln_size;
    double depth;  // density value, lower is deeper
  };
  std::vector<Minimum> minima;
  for (std::size_t i = 1; i + 1 < estimate.grid.size(); ++i) {
    if (estimate.density[i] < estimate.density[i - 1] &&
        estimate.density[i] < estimate.density[i + 1]) {
      minima.push_back({estimate.grid[i], estimate.density[i]});
    }
  }

  const double lo_ratio = std::log(target_ratio / (1.0 + tolerance));
  const double hi_ratio = std::log(target_ratio * (1.0 + tolerance));

  // Greedy small-to-large: keep a minimum when its ln-ratio to the last kept
  // boundary is inside the band; below the band the deeper of the two wins;
  // above the band the candidate is dropped (it cannot restore the ratio
  // invariant).
  std::vector<Minimum> kept;
  for (const auto& m : minima) {
    if (kept.empty()) {
      kept.push_back(m);
      continue;
    }
    const double gap = m.ln_size - kept.back().ln_size;
    if (gap < lo_ratio) {
      if (m.depth < kept.back().depth) {
        const bool replace_ok =
            kept.size() == 1 ||
            (m.ln_size - kept[kept.size() - 2].ln_size) <= hi_ratio;
        if (replace_ok) kept.back() = m;
      }
    } else if (gap <= hi_ratio) {
      kept.push_back(m);
    }
    // gap > hi_ratio: drop
  }

  LayerPartition partition;
  for (const auto& m : kept) partition.boundaries.push_back(std::exp(m.ln_size));
  for (std::size_t i = 1; i < partition.boundaries.size(); ++i) {
    partition.ratios.push_back(partition.boundaries[i] /
                               partition.boundaries[i - 1]);
  }
  return partition;
}

LayerPartition assign(const SizeSample& sample,
                      const std::vector<double>& boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (!(boundaries[i] > boundaries[i - 1])) {
      throw InputError("layers: boundaries must be strictly increasing");
    }
  }
  if (!boundaries.empty() && !(boundaries.front() > 0.0)) {
    throw InputError("layers: boundaries must be positive");
  }
  LayerPartition partition;
  partition.boundaries = boundaries;
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    partition.ratios.push_back(boundaries[i] / boundaries[i - 1]);
  }
  for (const auto& e : sample.entries) {
    partition.assignments[e.entity_id] = partition.layer_of(e.size_usd);
  }
  return partition;
}

LayerStats layer_stats(const LayerPartition& partition,
                       const HoldingsTable& holdings) {
  const int n_layers = partition.layer_count();

  std::map<std::string, std::set<std::string>> distinct_holdings;
  for (const auto& p : holdings.positions) {
    distinct_holdings[p.entity_id].insert(p.asset_id);
  }

  std::vector<std::size_t> counts(n_layers, 0);
  std::vector<double> holding_sums(n_layers, 0.0);
  LayerStats stats;
  for (const auto& [entity, layer] : partition.assignments) {
    counts[layer - 1] += 1;
    const auto it = distinct_holdings.find(entity);
    if (it == distinct_holdings.end()) {
      stats.entities_without_holdings.push_back(entity);
    } else {
      holding_sums[layer - 1] += static_cast<double>(it->second.size());
    }
  }

  for (int layer = 1; layer <= n_layers; ++layer) {
    LayerStatsRow row;
    row.layer = layer;
    row.count = counts[layer - 1];
    row.mean_holdings =
        row.count > 0 ? holding_sums[layer - 1] / static_cast<double>(row.count)
                      : 0.0;
    row.upper_bound = layer <= static_cast<int>(partition.boundaries.size())
                          ? partition.boundaries[layer - 1]
                          : std::numeric_limits<double>::infinity();
    row.ratio_to_previous =
        (layer >= 2 && layer <= static_cast<int>(partition.boundaries.size()))
            ? partition.boundaries[layer - 1] / partition.boundaries[layer - 2]
            : 0.0;
    stats.rows.push_back(row);
  }
  if (!partition.ratios.empty()) {
    double acc = 0.0;
    for (double r : partition.ratios) acc += r;
    stats.mean_ratio = acc / static_cast<double>(partition.ratios.size());
  }
  return stats;
}

}  // namespace dsiscan
