#include "dsiscan/distfit.hpp"

#include <algorithm>
#include <cmath>

namespace dsiscan {

LognormalFit fit_lognormal(const SizeSample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) {
    throw InputError("distfit: fit_lognormal requires at least 2 entries");
  }
  const auto logs = sample.log_sizes();
  double mu = 0.0;
  for (double x : logs) mu += x;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double x : logs) var += (x - mu) * (x - mu);
  var /= static_cast<double>(n);  // population variance, the exact MLE
  if (!(var > 0.0)) {
    throw InputError("distfit: degenerate fit, all sizes identical");
  }

  LognormalFit fit;
  fit.mu = mu;
  fit.sigma = std::sqrt(var);
  fit.implied_mean = std::exp(mu + var / 2.0);
  fit.implied_log_mode = std::exp(mu);
  double ll = 0.0;
  for (double x : logs) {
    // ln of the lognormal density at S = e^x.
    ll += -x - 0.5 * std::log(2.0 * M_PI * var) -
          (x - mu) * (x - mu) / (2.0 * var);
  }
  fit.log_likelihood = ll;
  return fit;
}

double lognormal_ccdf(const LognormalFit& fit, double s) {
  if (!(s > 0.0)) return 1.0;
  const double z = (std::log(s) - fit.mu) / fit.sigma;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<std::pair<double, double>> empirical_ccdf(
    const SizeSample& sample) {
  const std::size_t n = sample.size();
  if (n == 0) throw InputError("distfit: empirical_ccdf on empty sample");
  std::vector<double> sizes;
  sizes.reserve(n);
  for (const auto& e : sample.entries) sizes.push_back(e.size_usd);
  std::sort(sizes.begin(), sizes.end());

  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sizes[j] == sizes[i]) ++j;
    // fraction of entities with size >= sizes[i]
    out.emplace_back(sizes[i],
                     static_cast<double>(n - i) / static_cast<double>(n));
    i = j;
  }
  return out;
}

ResidualSeries residuals(const SizeSample& sample, const LognormalFit& fit) {
  if (!(fit.sigma > 0.0)) throw InputError("distfit: invalid fit");
  ResidualSeries series;
  for (const auto& [size, frac] : empirical_ccdf(sample)) {
    series.points.push_back(
        {std::log(size), lognormal_ccdf(fit, size) - frac});
  }
  return series;
}

}  // namespace dsiscan
