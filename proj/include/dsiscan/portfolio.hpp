#pragma once

#include <map>
#include <string>
#include <vector>

#include "dsiscan/layers.hpp"
#include "dsiscan/types.hpp"

namespace dsiscan {

// Sparse portfolio: asset -> weight.
using Portfolio = std::map<std::string, double>;

struct SimilarityMatrix {
  int layers = 0;
  // entry(i,j): mean pairwise similarity, NaN when a diagonal entry has
  // fewer than two member portfolios.
  std::vector<std::vector<double>> values;
};

struct AdjacencyMatrices {
  std::vector<std::string> holding_order;  // by descending ubiquity, ties by id
  std::vector<std::vector<double>> m_frac;  // layers x holdings
  std::vector<std::vector<int>> m_bin;
  std::vector<std::size_t> ubiquity;  // per holding_order entry
  std::vector<int> empty_layers;
};

struct PowerLawFit {
  double alpha = 0.0;
  double stderr_alpha = 0.0;
  double x_min = 0.0;
  std::size_t tail_count = 0;
};

struct PerformanceRow {
  int layer = 0;  // 0 = whole universe
  std::size_t count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct PerformanceSummary {
  std::map<std::string, double> sharpe_by_entity;
  std::vector<PerformanceRow> layer_rows;  // index 0 = whole universe
  std::size_t entities_without_returns = 0;
  std::size_t entities_below_min_obs = 0;
};

// Cosine similarity over common assets; scale-invariant in each portfolio's
// weights and 1 iff the weight vectors are proportional on identical support.
double similarity(const Portfolio& e, const Portfolio& e_prime);

// Mean similarity over unordered pairs per layer pair; diagonal excludes
// self-pairs.
SimilarityMatrix layer_similarity_matrix(const LayerPartition& partition,
                                         const HoldingsTable& holdings);

// Cap-weighted portfolio over all distinct assets with known caps.
Portfolio market_portfolio(const HoldingsTable& holdings,
                           std::size_t* missing_cap_count = nullptr);

AdjacencyMatrices adjacency(const LayerPartition& partition,
                            const HoldingsTable& holdings);

// Continuous power-law MLE (f(x) ~ 1/x^{alpha+1}) on the market caps of
// assets with ubiquity rank > rank_threshold, above the sample minimum.
PowerLawFit ubiquity_cap_fit(const HoldingsTable& holdings,
                             std::size_t rank_threshold = 500);

// Annualized mean over annualized volatility, zero risk-free rate.
double sharpe(const std::vector<double>& returns, int periods_per_year);

PerformanceSummary layer_performance(const LayerPartition& partition,
                                     const ReturnsTable& returns,
                                     int periods_per_year,
                                     std::size_t min_observations = 30);

}  // namespace dsiscan
