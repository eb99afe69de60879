#pragma once

#include <utility>
#include <vector>

#include "dsiscan/types.hpp"

namespace dsiscan {

struct LognormalFit {
  double mu = 0.0;              // location, natural-log USD
  double sigma = 0.0;           // scale, natural-log units
  double log_likelihood = 0.0;
  double implied_mean = 0.0;      // exp(mu + sigma^2/2)
  double implied_log_mode = 0.0;  // exp(mu), mode of the log-size density
};

struct ResidualPoint {
  double ln_size = 0.0;
  double delta_f = 0.0;  // fitted CCDF minus empirical CCDF
};

struct ResidualSeries {
  std::vector<ResidualPoint> points;  // ln_size strictly increasing
};

// Closed-form maximum-likelihood lognormal fit (population 1/N variance).
LognormalFit fit_lognormal(const SizeSample& sample);

// Upper-tail CCDF of the fitted lognormal at size s.
double lognormal_ccdf(const LognormalFit& fit, double s);

// (size, fraction of entities with size >= size), evaluated at the sorted
// observed sizes; right-continuous step convention, CCDF(min) = 1.
std::vector<std::pair<double, double>> empirical_ccdf(const SizeSample& sample);

// delta_F(S_i) = fitted CCDF minus empirical CCDF at each observed size.
ResidualSeries residuals(const SizeSample& sample, const LognormalFit& fit);

}  // namespace dsiscan
