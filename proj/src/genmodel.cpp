#include "dsiscan/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsiscan/rng.hpp"

namespace dsiscan {

namespace {

SizeSample make_sample(const std::vector<double>& sizes) {
  SizeSample sample;
  sample.entries.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    sample.entries.push_back({"synth_" + std::to_string(i + 1), sizes[i]});
  }
  return sample;
}

double unnormalized_logperiodic(double x, double m, double omega, double w0,
                                double w1) {
  // Density over S at S = e^x; the e^{-m x} factor is S^{-m}.
  return std::exp(-m * x) * (w0 + w1 * std::cos(omega * x));
}

}  // namespace

void GrowthModelParams::validate() const {
  if (!(n > 1.0)) throw InputError("genmodel: n must exceed 1");
  if (!(T0 > 0.0)) throw InputError("genmodel: T0 must be positive");
  if (!(gamma > 0.0)) throw InputError("genmodel: gamma must be positive");
  if (!(gamma * n < 1.0)) {
    throw InputError("genmodel: gamma*n must be below 1");
  }
  if (kappa < 1) throw InputError("genmodel: kappa must be >= 1");
  if (!(w0 > 0.0) || !(std::fabs(w1) < w0)) {
    throw InputError("genmodel: need |w1| < w0 for a positive density");
  }
}

GrowthModelParams GrowthModelParams::from_target(double m, double omega,
                                                 int kappa, double T0,
                                                 double w0, double w1) {
  if (!(omega > 0.0) || kappa < 1) {
    throw InputError("genmodel: invalid target frequency");
  }
  GrowthModelParams p;
  p.gamma = std::expm1(2.0 * M_PI / (static_cast<double>(kappa) * omega));
  // m = n + (n/2)(n+1) gamma, the positive root of the quadratic in n.
  const double g = p.gamma;
  const double b = 1.0 + 0.5 * g;
  p.n = (-b + std::sqrt(b * b + 2.0 * g * m)) / g;
  p.kappa = kappa;
  p.T0 = T0;
  p.w0 = w0;
  p.w1 = w1;
  p.validate();
  return p;
}

SizeSample sample_boltzmann(double T0, int count, std::uint64_t seed) {
  if (!(T0 > 0.0)) throw InputError("genmodel: T0 must be positive");
  if (count < 0) throw InputError("genmodel: negative count");
  CounterRng rng(seed);
  std::vector<double> sizes(count);
  for (int i = 0; i < count; ++i) {
    sizes[i] = -T0 * std::log1p(-rng.uniform(i));
  }
  return make_sample(sizes);
}

SizeSample sample_tsallis(const GrowthModelParams& params, int count,
                          std::uint64_t seed) {
  if (!(params.n > 1.0)) throw InputError("genmodel: n must exceed 1");
  if (!(params.T0 > 0.0)) throw InputError("genmodel: T0 must be positive");
  if (count < 0) throw InputError("genmodel: negative count");
  CounterRng rng(seed);
  const double scale = params.n * params.T0;
  const double expo = -1.0 / (params.n - 1.0);
  std::vector<double> sizes(count);
  for (int i = 0; i < count; ++i) {
    sizes[i] = scale * (std::pow(1.0 - rng.uniform(i), expo) - 1.0);
  }
  return make_sample(sizes);
}

std::vector<ComplexExponent> complex_exponents(double gamma, double n,
                                               int k_max) {
  if (!(n > 1.0)) throw InputError("genmodel: n must exceed 1");
  if (!(gamma > 0.0 && gamma * n < 1.0)) {
    throw InputError("genmodel: need 0 < gamma < 1/n");
  }
  if (k_max < 0) throw InputError("genmodel: negative k_max");
  const double denom = std::log1p(gamma);
  const double real_part = -std::log1p(-n * gamma) / denom;
  std::vector<ComplexExponent> out;
  out.reserve(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    out.push_back({k, real_part, 2.0 * M_PI * k / denom});
  }
  return out;
}

double predict_omega(double gamma, int kappa) {
  if (!(gamma > 0.0)) throw InputError("genmodel: gamma must be positive");
  if (kappa < 1) throw InputError("genmodel: kappa must be >= 1");
  return 2.0 * M_PI / (static_cast<double>(kappa) * std::log1p(gamma));
}

double integrate_density(const GridDensity& density) {
  const auto& x = density.ln_grid;
  const auto& v = density.values;
  if (x.size() != v.size() || x.size() < 2) {
    throw InputError("genmodel: invalid grid density");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    // dS = e^x dx
    const double fa = v[i - 1] * std::exp(x[i - 1]);
    const double fb = v[i] * std::exp(x[i]);
    total += 0.5 * (fa + fb) * (x[i] - x[i - 1]);
  }
  return total;
}

GridDensity logperiodic_pdf(const GrowthModelParams& params, double s_min,
                            double s_max, int grid_size) {
  params.validate();
  if (!(s_min > 0.0 && s_min < s_max)) {
    throw InputError("genmodel: need 0 < s_min < s_max");
  }
  if (grid_size < 16) throw InputError("genmodel: grid too small");
  const double m = params.exponent_m();
  const double omega = predict_omega(params.gamma, params.kappa);
  const double x_lo = std::log(s_min);
  const double x_hi = std::log(s_max);

  // Composite Simpson quadrature of the mass; integrand in x carries the
  // e^x Jacobian of dS.
  const int quad_n = 1 << 15;  // panels
  const double h = (x_hi - x_lo) / quad_n;
  auto mass_integrand = [&](double x) {
    return unnormalized_logperiodic(x, m, omega, params.w0, params.w1) *
           std::exp(x);
  };
  double quad = mass_integrand(x_lo) + mass_integrand(x_hi);
  for (int i = 1; i < quad_n; ++i) {
    quad += (i % 2 == 1 ? 4.0 : 2.0) * mass_integrand(x_lo + h * i);
  }
  quad *= h / 3.0;
  if (!(quad > 0.0)) throw InputError("genmodel: density mass is nonpositive");

  GridDensity density;
  density.ln_grid.resize(grid_size);
  density.values.resize(grid_size);
  const double step = (x_hi - x_lo) / static_cast<double>(grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    const double x = x_lo + step * i;
    density.ln_grid[i] = x;
    density.values[i] =
        unnormalized_logperiodic(x, m, omega, params.w0, params.w1) / quad;
  }
  return density;
}

SizeSample sample_logperiodic(const GrowthModelParams& params, double s_min,
                              double s_max, int count, std::uint64_t seed) {
  if (count < 0) throw InputError("genmodel: negative count");
  const GridDensity density = logperiodic_pdf(params, s_min, s_max, 16384);
  const auto& x = density.ln_grid;
  const std::size_t n = x.size();

  // Cumulative mass in S along the ln grid, then inverse-CDF per draw.
  std::vector<double> cdf(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double fa = density.values[i - 1] * std::exp(x[i - 1]);
    const double fb = density.values[i] * std::exp(x[i]);
    cdf[i] = cdf[i - 1] + 0.5 * (fa + fb) * (x[i] - x[i - 1]);
  }
  const double total = cdf.back();
  for (double& c : cdf) c /= total;

  CounterRng rng(seed);
  std::vector<double> sizes(count);
  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform(i);
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    if (k == 0) k = 1;
    const double c0 = cdf[k - 1];
    const double c1 = cdf[k];
    const double t = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.0;
    sizes[i] = std::exp(x[k - 1] + t * (x[k] - x[k - 1]));
  }
  return make_sample(sizes);
}

GridDensity evolve_distribution(const GrowthModelParams& params,
                                const GridDensity& initial, int steps,
                                bool renormalize) {
  params.validate();
  if (steps < 0) throw InputError("genmodel: negative step count");
  const auto& x = initial.ln_grid;
  if (x.size() != initial.values.size() || x.size() < 3) {
    throw InputError("genmodel: invalid grid density");
  }
  if (steps > 0) {
    const double omega_k = predict_omega(params.gamma, steps);
    const double wavelength = 2.0 * M_PI / omega_k;
    double max_dx = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      max_dx = std::max(max_dx, x[i] - x[i - 1]);
    }
    if (max_dx > wavelength / 16.0) {
      throw InputError(
          "genmodel: grid too coarse for the predicted oscillation");
    }
  }

  GridDensity current = initial;
  const double g = params.gamma;
  const double gn = g * params.n;
  const double add = gn * params.T0;
  std::vector<double> mapped_x(x.size());
  std::vector<double> mapped_v(x.size());
  for (int step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = std::exp(x[i]);
      mapped_x[i] = std::log(s * (1.0 + g) + add);
      mapped_v[i] = (1.0 - gn) * current.values[i];
    }
    // Interpolate back onto the fixed grid; left of the mapped range the
    // evolution provides no inflow, so the first mapped value is held.
    std::size_t k = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double target = x[i];
      if (target <= mapped_x.front()) {
        current.values[i] = mapped_v.front();
        continue;
      }
      if (target >= mapped_x.back()) {
        current.values[i] = mapped_v.back();
        continue;
      }
      while (mapped_x[k + 1] < target) ++k;
      const double t = (target - mapped_x[k]) / (mapped_x[k + 1] - mapped_x[k]);
      current.values[i] = mapped_v[k] * (1.0 - t) + mapped_v[k + 1] * t;
    }
    if (renormalize) {
      const double mass = integrate_density(current);
      if (!(mass > 0.0)) throw InputError("genmodel: evolved mass vanished");
      for (double& v : current.values) v /= mass;
    }
  }
  return current;
}

}  // namespace dsiscan
