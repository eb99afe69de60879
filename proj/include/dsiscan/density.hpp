#pragma once

#include <vector>

#include "dsiscan/types.hpp"

namespace dsiscan {

struct DensityEstimate {
  std::vector<double> grid;     // ln-size values, uniform and increasing
  std::vector<double> density;  // nonnegative, integrates to ~1
  double bandwidth = 0.0;       // ln-units
};

struct DerivativeSeries {
  std::vector<double> grid;  // ln-size values where the derivative is defined
  std::vector<double> values;
  double H = 0.0;
  double q = 0.0;
};

// Gaussian KDE of the log-size PDF on a uniform grid spanning
// [min ln S - 4*bandwidth, max ln S + 4*bandwidth].
DensityEstimate kde(const SizeSample& sample, double bandwidth,
                    int grid_size);

// Same estimator evaluated from pre-extracted ln-sizes on an explicit grid.
// Used by the pipeline's surrogate loop where the grid must stay fixed.
std::vector<double> kde_on_grid(const std::vector<double>& log_sizes,
                                double bandwidth,
                                const std::vector<double>& grid);

// Leave-one-out log-likelihood bandwidth selection; ties break toward the
// larger candidate.
double select_bandwidth_cv(const SizeSample& sample,
                           const std::vector<double>& candidates);
double select_bandwidth_cv(const std::vector<double>& log_sizes,
                           const std::vector<double>& candidates);

// Generalized (H,q)-derivative of a gridded function of ln S:
//   D(x) = (f(x) - f(qx)) / ((1-q) x)^H  with x = exp(ln S).
// Scaling x by q is a shift by ln q on the ln-grid; f(qx) is linearly
// interpolated and points whose shifted argument leaves the grid are dropped.
DerivativeSeries hq_derivative(const DensityEstimate& estimate, double H,
                               double q);

// The 6x6 scan: H in {0.5, 0.58, ..., 0.9}, q in {0.65, 0.71, ..., 0.95}.
std::vector<DerivativeSeries> hq_scan(const DensityEstimate& estimate);

}  // namespace dsiscan
