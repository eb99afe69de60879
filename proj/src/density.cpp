#include "dsiscan/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsiscan {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

std::vector<double> checked_log_sizes(const SizeSample& sample) {
  if (sample.size() == 0) throw InputError("density: empty sample");
  return sample.log_sizes();
}

}  // namespace

std::vector<double> kde_on_grid(const std::vector<double>& log_sizes,
                                double bandwidth,
                                const std::vector<double>& grid) {
  if (!(bandwidth > 0.0)) {
    throw InputError("density: nonpositive bandwidth");
  }
  if (log_sizes.empty()) throw InputError("density: empty sample");
  if (grid.size() < 2) throw InputError("density: grid too small");
  const double inv_h = 1.0 / bandwidth;
  const double norm =
      kInvSqrt2Pi * inv_h / static_cast<double>(log_sizes.size());
  std::vector<double> out(grid.size(), 0.0);
  // Uniform grid: scatter each point onto the grid cells within 8 bandwidths.
  // exp(-32) is below double rounding noise, so the truncation is exact in
  // double precision.
  const double g0 = grid.front();
  const double step = (grid.back() - g0) / static_cast<double>(grid.size() - 1);
  const double cutoff = 8.0 * bandwidth;
  const auto n_grid = static_cast<std::ptrdiff_t>(grid.size());
  for (double x : log_sizes) {
    auto lo = static_cast<std::ptrdiff_t>(std::ceil((x - cutoff - g0) / step));
    auto hi = static_cast<std::ptrdiff_t>(std::floor((x + cutoff - g0) / step));
    lo = std::max<std::ptrdiff_t>(lo, 0);
    hi = std::min(hi, n_grid - 1);
    for (std::ptrdiff_t g = lo; g <= hi; ++g) {
      const double z = (g0 + step * static_cast<double>(g) - x) * inv_h;
      out[static_cast<std::size_t>(g)] += std::exp(-0.5 * z * z);
    }
  }
  for (double& v : out) v *= norm;
  return out;
}

DensityEstimate kde(const SizeSample& sample, double bandwidth,
                    int grid_size) {
  if (grid_size < 64) throw InputError("density: grid_size must be >= 64");
  const auto logs = checked_log_sizes(sample);
  const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
  const double lo = *lo_it - 4.0 * bandwidth;
  const double hi = *hi_it + 4.0 * bandwidth;

  DensityEstimate est;
  est.bandwidth = bandwidth;
  est.grid.resize(grid_size);
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  for (int i = 0; i < grid_size; ++i) est.grid[i] = lo + step * i;
  est.density = kde_on_grid(logs, bandwidth, est.grid);
  return est;
}

double select_bandwidth_cv(const std::vector<double>& log_sizes,
                           const std::vector<double>& candidates) {
  if (log_sizes.size() < 10) {
    throw InputError("density: bandwidth CV requires >= 10 data points");
  }
  if (candidates.size() < 2) {
    throw InputError("density: bandwidth CV requires >= 2 candidates");
  }
  for (double h : candidates) {
    if (!(h > 0.0)) throw InputError("density: nonpositive candidate bandwidth");
  }
  std::vector<double> xs = log_sizes;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();

  double best_h = candidates.front();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double h : candidates) {
    const double inv_h = 1.0 / h;
    // Kernel support truncated at 8h: exp(-32) is below double noise here.
    const double cutoff = 8.0 * h;
    double ll = 0.0;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
      while (lo < n && xs[i] - xs[lo] > cutoff) ++lo;
      double acc = 0.0;
      for (std::size_t j = lo; j < n && xs[j] - xs[i] <= cutoff; ++j) {
        if (j == i) continue;
        const double z = (xs[i] - xs[j]) * inv_h;
        acc += std::exp(-0.5 * z * z);
      }
      const double f = kInvSqrt2Pi * inv_h * acc / static_cast<double>(n - 1);
      ll += std::log(std::max(f, 1e-300));
    }
    if (ll > best_ll || (ll == best_ll && h > best_h)) {
      best_ll = ll;
      best_h = h;
    }
  }
  return best_h;
}

double select_bandwidth_cv(const SizeSample& sample,
                           const std::vector<double>& candidates) {
  return select_bandwidth_cv(checked_log_sizes(sample), candidates);
}

DerivativeSeries hq_derivative(const DensityEstimate& estimate, double H,
                               double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InputError("density: q must lie in (0,1)");
  }
  if (!(H >= 0.0 && H <= 1.0)) {
    throw InputError("density: H must lie in [0,1]");
  }
  const auto& grid = estimate.grid;
  const auto& f = estimate.density;
  if (grid.size() < 2 || grid.size() != f.size()) {
    throw InputError("density: invalid estimate");
  }
  const double shift = std::log(q);  // negative
  const double step = grid[1] - grid[0];

  DerivativeSeries out;
  out.H = H;
  out.q = q;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g_shifted = grid[i] + shift;
    if (g_shifted < grid.front()) continue;  // qx outside the support
    const double pos = (g_shifted - grid.front()) / step;
    const std::size_t k = std::min(static_cast<std::size_t>(pos),
                                   grid.size() - 2);
    const double t = pos - static_cast<double>(k);
    const double f_qx = f[k] * (1.0 - t) + f[k + 1] * t;
    const double x = std::exp(grid[i]);
    out.grid.push_back(grid[i]);
    out.values.push_back((f[i] - f_qx) / std::pow((1.0 - q) * x, H));
  }
  return out;
}

std::vector<DerivativeSeries> hq_scan(const DensityEstimate& estimate) {
  std::vector<DerivativeSeries> out;
  out.reserve(36);
  for (int i = 0; i < 6; ++i) {
    const double H = 0.5 + 0.08 * i;
    for (int j = 0; j < 6; ++j) {
      const double q = 0.65 + 0.06 * j;
      out.push_back(hq_derivative(estimate, H, q));
    }
  }
  return out;
}

}  // namespace dsiscan
