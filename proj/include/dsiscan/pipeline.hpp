#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsiscan/density.hpp"
#include "dsiscan/distfit.hpp"
#include "dsiscan/genmodel.hpp"
#include "dsiscan/layers.hpp"
#include "dsiscan/portfolio.hpp"
#include "dsiscan/spectral.hpp"

namespace dsiscan {

struct PipelineConfig {
  std::string sizes_path;
  std::string holdings_path;  // optional
  std::string returns_path;   // optional
  std::string out_dir;        // empty: analyze in memory, write nothing

  std::uint64_t seed = 42;
  int surrogates = 1000;
  double omega_max = 20.0;
  int omega_bins = 512;
  int grid_size = 512;
  std::vector<double> bandwidths;  // empty: geometric 0.05..1.0, 10 values
  double layer_ratio = 3.5;
  double layer_tolerance = 0.35;
  int periods_per_year = 252;
  bool emit_hq_scan = true;

  // Representative (H,q) pair for the spectral stage and conditioning of the
  // derivative series ahead of the periodogram.
  double rep_H = 0.5;
  double rep_q = 0.65;
  int detrend_order = 2;
  // Tail taper: grid points where the density corresponds to fewer than this
  // many expected sample points per bandwidth window are smoothly suppressed.
  double taper_count = 1.5;
  // Degree of the exp(polynomial) log-density fitted as the density-route
  // null model: high enough to track the smooth trend (power-law tails are
  // linear in ln S, lognormal bodies quadratic), far too stiff to follow a
  // log-periodic ripple.
  int null_degree = 3;

  std::vector<double> bandwidth_candidates() const;
  void validate() const;
};

// One spectral detection: observed periodogram plus peak report whose
// p-values come from a lognormal parametric-bootstrap null (surrogate
// samples re-run through the identical stage).
struct RouteResult {
  Periodogram periodogram;
  PeakReport report;
  double fundamental = 0.0;  // omega of the strongest peak, 0 if none
  double p_value = 1.0;
  double max_power = 0.0;
};

struct AnalyzeResult {
  LognormalFit fit;
  double cv_bandwidth = 0.0;
  double analysis_bandwidth = 0.0;  // cv_bandwidth / 2 for the DSI stage
  RouteResult residual_route;       // Lomb of the CCDF residuals
  RouteResult density_route;        // Lomb of the conditioned (H,q)-derivative
  DensityEstimate density;          // at cv_bandwidth
  LayerPartition partition;
  LayerStats stats;
  bool portfolio_skipped = true;
  bool performance_skipped = true;
  std::string report_json;  // serialized report bundle
};

// Density-route detection alone (fit, CV bandwidth, KDE, (H,q)-derivative,
// Lomb, bootstrap significance); the fast path for scripted scans.
RouteResult detect_dsi(const SizeSample& sample, const PipelineConfig& cfg);

// Full analysis of an in-memory sample; holdings/returns may be null.
AnalyzeResult analyze_sample(const SizeSample& sample,
                             const HoldingsTable* holdings,
                             const ReturnsTable* returns,
                             const PipelineConfig& cfg);

// Load inputs per config, analyze, and write the report bundle to out_dir.
AnalyzeResult run_analyze(const PipelineConfig& cfg);

// Write a synthetic sizes CSV plus ground_truth.json.
void run_synth(const GrowthModelParams& params, double s_min, double s_max,
               int count, std::uint64_t seed, const std::string& out_dir);

}  // namespace dsiscan
