#include "dsiscan/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dsiscan {

namespace {

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= sorted.size()) return sorted.back();
  const double t = pos - static_cast<double>(k);
  return sorted[k] * (1.0 - t) + sorted[k + 1] * t;
}

double norm2(const Portfolio& p) {
  double acc = 0.0;
  for (const auto& [asset, w] : p) acc += w * w;
  return std::sqrt(acc);
}

}  // namespace

double similarity(const Portfolio& e, const Portfolio& e_prime) {
  const double na = norm2(e);
  const double nb = norm2(e_prime);
  if (!(na > 0.0) || !(nb > 0.0)) {
    throw InputError("portfolio: all-zero weight vector");
  }
  double dot = 0.0;
  auto ia = e.begin();
  auto ib = e_prime.begin();
  while (ia != e.end() && ib != e_prime.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return dot / (na * nb);
}

SimilarityMatrix layer_similarity_matrix(const LayerPartition& partition,
                                         const HoldingsTable& holdings) {
  const int n_layers = partition.layer_count();
  const auto portfolios = holdings.by_entity();

  std::vector<std::vector<const Portfolio*>> by_layer(n_layers);
  for (const auto& [entity, layer] : partition.assignments) {
    const auto it = portfolios.find(entity);
    if (it == portfolios.end()) continue;
    if (norm2(it->second) > 0.0) by_layer[layer - 1].push_back(&it->second);
  }

  SimilarityMatrix matrix;
  matrix.layers = n_layers;
  matrix.values.assign(n_layers, std::vector<double>(n_layers, 0.0));
  for (int i = 0; i < n_layers; ++i) {
    for (int j = i; j < n_layers; ++j) {
      double acc = 0.0;
      std::size_t pairs = 0;
      if (i == j) {
        // Distinct unordered pairs within the layer; self-pairs excluded.
        const auto& members = by_layer[i];
        for (std::size_t a = 0; a < members.size(); ++a) {
          for (std::size_t b = a + 1; b < members.size(); ++b) {
            acc += similarity(*members[a], *members[b]);
            ++pairs;
          }
        }
      } else {
        for (const auto* pa : by_layer[i]) {
          for (const auto* pb : by_layer[j]) {
            acc += similarity(*pa, *pb);
            ++pairs;
          }
        }
      }
      const double value =
          pairs > 0 ? acc / static_cast<double>(pairs)
                    : std::numeric_limits<double>::quiet_NaN();
      matrix.values[i][j] = value;
      matrix.values[j][i] = value;
    }
  }
  return matrix;
}

Portfolio market_portfolio(const HoldingsTable& holdings,
                           std::size_t* missing_cap_count) {
  std::map<std::string, double> caps;
  std::set<std::string> missing;
  for (const auto& p : holdings.positions) {
    if (p.market_cap_usd) {
      caps[p.asset_id] = *p.market_cap_usd;
    } else if (caps.find(p.asset_id) == caps.end()) {
      missing.insert(p.asset_id);
    }
  }
  for (const auto& [asset, cap] : caps) missing.erase(asset);
  if (missing_cap_count) *missing_cap_count = missing.size();
  if (caps.empty()) {
    throw InputError("portfolio: no market caps available");
  }
  double total = 0.0;
  for (const auto& [asset, cap] : caps) total += cap;
  Portfolio market;
  for (const auto& [asset, cap] : caps) market[asset] = cap / total;
  return market;
}

AdjacencyMatrices adjacency(const LayerPartition& partition,
                            const HoldingsTable& holdings) {
  const int n_layers = partition.layer_count();

  // Ubiquity: number of portfolios holding the asset.
  std::map<std::string, std::set<std::string>> holders;
  for (const auto& p : holdings.positions) {
    holders[p.asset_id].insert(p.entity_id);
  }
  AdjacencyMatrices out;
  out.holding_order.reserve(holders.size());
  for (const auto& [asset, hs] : holders) out.holding_order.push_back(asset);
  std::sort(out.holding_order.begin(), out.holding_order.end(),
            [&](const std::string& a, const std::string& b) {
              const auto ua = holders[a].size();
              const auto ub = holders[b].size();
              return ua != ub ? ua > ub : a < b;
            });
  for (const auto& asset : out.holding_order) {
    out.ubiquity.push_back(holders[asset].size());
  }

  std::vector<std::size_t> layer_sizes(n_layers, 0);
  for (const auto& [entity, layer] : partition.assignments) {
    layer_sizes[layer - 1] += 1;
  }
  std::map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < out.holding_order.size(); ++c) {
    column_of[out.holding_order[c]] = c;
  }

  // (entity, asset) pairs are unique, so counting positions per layer counts
  // distinct holders.
  std::vector<std::vector<std::size_t>> holder_counts(
      n_layers, std::vector<std::size_t>(out.holding_order.size(), 0));
  for (const auto& p : holdings.positions) {
    const auto assigned = partition.assignments.find(p.entity_id);
    if (assigned == partition.assignments.end()) continue;
    const int b = assigned->second - 1;
    const std::size_t c = column_of[p.asset_id];
    holder_counts[b][c] += 1;
  }

  out.m_frac.assign(n_layers,
                    std::vector<double>(out.holding_order.size(), 0.0));
  out.m_bin.assign(n_layers, std::vector<int>(out.holding_order.size(), 0));
  for (int b = 0; b < n_layers; ++b) {
    if (layer_sizes[b] == 0) {
      out.empty_layers.push_back(b + 1);
      continue;
    }
    for (std::size_t c = 0; c < out.holding_order.size(); ++c) {
      out.m_frac[b][c] = static_cast<double>(holder_counts[b][c]) /
                         static_cast<double>(layer_sizes[b]);
      out.m_bin[b][c] = holder_counts[b][c] > 0 ? 1 : 0;
    }
  }
  return out;
}

PowerLawFit ubiquity_cap_fit(const HoldingsTable& holdings,
                             std::size_t rank_threshold) {
  // Rank assets by ubiquity (rank 1 = most ubiquitous) and fit the caps of
  // assets strictly below the threshold rank.
  LayerPartition trivial;  // single unbounded layer, assignments unused here
  for (const auto& p : holdings.positions) {
    trivial.assignments[p.entity_id] = 1;
  }
  const auto adj = adjacency(trivial, holdings);

  std::map<std::string, double> caps;
  for (const auto& p : holdings.positions) {
    if (p.market_cap_usd) caps[p.asset_id] = *p.market_cap_usd;
  }
  std::vector<double> tail;
  for (std::size_t c = 0; c < adj.holding_order.size(); ++c) {
    const std::size_t rank = c + 1;
    if (rank <= rank_threshold) continue;
    const auto it = caps.find(adj.holding_order[c]);
    if (it != caps.end()) tail.push_back(it->second);
  }
  if (tail.size() < 100) {
    throw InputError("portfolio: insufficient data for power-law fit");
  }
  const double x_min = *std::min_element(tail.begin(), tail.end());
  double log_sum = 0.0;
  for (double x : tail) log_sum += std::log(x / x_min);
  if (!(log_sum > 0.0)) {
    throw InputError("portfolio: degenerate caps, power-law fit undefined");
  }
  PowerLawFit fit;
  fit.tail_count = tail.size();
  fit.x_min = x_min;
  fit.alpha = static_cast<double>(tail.size()) / log_sum;
  fit.stderr_alpha = fit.alpha / std::sqrt(static_cast<double>(tail.size()));
  return fit;
}

double sharpe(const std::vector<double>& returns, int periods_per_year) {
  if (returns.size() < 2) {
    throw InputError("portfolio: sharpe needs at least 2 observations");
  }
  if (periods_per_year < 1) {
    throw InputError("portfolio: invalid periods_per_year");
  }
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= static_cast<double>(returns.size() - 1);
  if (!(var > 0.0)) {
    throw InputError("portfolio: zero-variance return series");
  }
  const double ppy = static_cast<double>(periods_per_year);
  return (mean * ppy) / (std::sqrt(var) * std::sqrt(ppy));
}

PerformanceSummary layer_performance(const LayerPartition& partition,
                                     const ReturnsTable& returns,
                                     int periods_per_year,
                                     std::size_t min_observations) {
  PerformanceSummary summary;
  const int n_layers = partition.layer_count();
  std::vector<std::vector<double>> per_layer(n_layers);
  std::vector<double> universe;

  for (const auto& [entity, layer] : partition.assignments) {
    const auto it = returns.series.find(entity);
    if (it == returns.series.end() || it->second.empty()) {
      summary.entities_without_returns += 1;
      continue;
    }
    std::vector<double> r;
    r.reserve(it->second.size());
    for (const auto& obs : it->second) r.push_back(obs.value);
    if (r.size() < 2) {
      summary.entities_below_min_obs += 1;
      continue;
    }
    double s;
    try {
      s = sharpe(r, periods_per_year);
    } catch (const InputError&) {
      summary.entities_below_min_obs += 1;
      continue;
    }
    summary.sharpe_by_entity[entity] = s;
    if (r.size() >= min_observations) {
      per_layer[layer - 1].push_back(s);
      universe.push_back(s);
    } else {
      summary.entities_below_min_obs += 1;
    }
  }

  auto make_row = [](int layer, std::vector<double> values) {
    std::sort(values.begin(), values.end());
    PerformanceRow row;
    row.layer = layer;
    row.count = values.size();
    if (!values.empty()) {
      row.min = values.front();
      row.q1 = quantile(values, 0.25);
      row.median = quantile(values, 0.5);
      row.q3 = quantile(values, 0.75);
      row.max = values.back();
    }
    return row;
  };
  summary.layer_rows.push_back(make_row(0, universe));
  for (int layer = 1; layer <= n_layers; ++layer) {
    summary.layer_rows.push_back(make_row(layer, per_layer[layer - 1]));
  }
  return summary;
}

}  // namespace dsiscan
