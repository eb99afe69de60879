#pragma once

#include <cstdint>
#include <vector>

#include "dsiscan/types.hpp"

namespace dsiscan {

// Parameter bundle of the multiplicative growth model.
struct GrowthModelParams {
  double n = 3.0;        // nonextensivity / tail exponent, > 1
  double T0 = 1.0;       // temperature scale, USD
  double gamma = 0.01;   // per-step multiplicative scale, in (0, 1/n)
  int kappa = 1;         // number of time steps, >= 1
  double w0 = 1.0;       // log-periodic amplitudes, |w1| < w0
  double w1 = 0.0;

  void validate() const;

  // Power-law exponent of the decorated tail: n + (n/2)(n+1)*gamma.
  double exponent_m() const { return n + 0.5 * n * (n + 1.0) * gamma; }

  // Solve (gamma, n) so the decorated density has tail exponent m and
  // oscillation frequency omega after kappa steps.
  static GrowthModelParams from_target(double m, double omega, int kappa,
                                       double T0, double w0, double w1);
};

struct ComplexExponent {
  int k = 0;
  double real_part = 0.0;
  double imag_part = 0.0;
};

// A density tabulated on a logarithmic size grid (values are densities in S).
struct GridDensity {
  std::vector<double> ln_grid;  // increasing ln S
  std::vector<double> values;   // P(S) at S = exp(ln_grid)
};

// i.i.d. exponential draws with mean T0 (inverse CDF, counter RNG).
SizeSample sample_boltzmann(double T0, int count, std::uint64_t seed);

// Inverse-CDF Tsallis draws: S = n*T0*((1-u)^{-1/(n-1)} - 1).
SizeSample sample_tsallis(const GrowthModelParams& params, int count,
                          std::uint64_t seed);

// alpha_k = -ln(1-n*gamma)/ln(1+gamma) + i * 2*pi*k / ln(1+gamma).
std::vector<ComplexExponent> complex_exponents(double gamma, double n,
                                               int k_max);

// Normalized density proportional to
//   S^{-m} [w0 + w1 cos(omega_kappa ln S)]   on [s_min, s_max],
// with m = exponent_m() and omega_kappa = predict_omega(gamma, kappa).
GridDensity logperiodic_pdf(const GrowthModelParams& params, double s_min,
                            double s_max, int grid_size = 16384);

SizeSample sample_logperiodic(const GrowthModelParams& params, double s_min,
                              double s_max, int count, std::uint64_t seed);

// One application per step of P(S + dS) = ((-dS + T(S))/T(S)) P(S) with
// dS = gamma*n*(T0 + S/n), regridded onto the input grid.
GridDensity evolve_distribution(const GrowthModelParams& params,
                                const GridDensity& initial, int steps,
                                bool renormalize = true);

// omega_kappa = 2*pi / (kappa * ln(1+gamma)); kappa = 1 is the single-step
// frequency.
double predict_omega(double gamma, int kappa);

// Trapezoidal integral of a grid density over S (measure dS = e^x dx).
double integrate_density(const GridDensity& density);

}  // namespace dsiscan
