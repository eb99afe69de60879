#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsiscan/distfit.hpp"

namespace dsiscan {

struct Periodogram {
  std::vector<double> omegas;  // positive, increasing
  std::vector<double> powers;  // classical normalized Lomb power
  double low_omega_cutoff = 0.0;  // 2*pi / span of the analyzed t values
  // Source series, retained so peak significance can reshuffle it.
  std::vector<double> t;
  std::vector<double> y;
};

struct Peak {
  double omega = 0.0;
  double power = 0.0;
  double p_value = 1.0;
};

struct HarmonicGroup {
  double fundamental = 0.0;
  std::vector<double> members;  // peaks near integer multiples of fundamental
};

struct PeakReport {
  std::vector<Peak> peaks;  // all above low_omega_cutoff, by descending power
  std::vector<HarmonicGroup> harmonic_groups;
  std::vector<double> scaling_ratios;  // exp(2*pi/omega) per reported peak
  std::vector<double> excluded_below_cutoff;
  std::string exclusion_reason;  // "wavelength spans entire range"
};

// Reusable trig tables for repeated Lomb evaluations over a fixed (t, omega)
// pair; the per-omega phase offset tau decouples the sine and cosine sums.
class LombPlan {
 public:
  LombPlan(const std::vector<double>& t, const std::vector<double>& omegas);

  std::vector<double> power(const std::vector<double>& y) const;
  // Maximum power over omegas >= omega_min (whole grid when omega_min <= 0).
  double max_power(const std::vector<double>& y, double omega_min = 0.0) const;

  const std::vector<double>& omegas() const { return omegas_; }

 private:
  std::vector<double> omegas_;
  std::size_t n_ = 0;
  std::vector<double> cos_tab_, sin_tab_;  // [omega][point], t already offset
  std::vector<double> cc_, ss_;            // per-omega denominators
};

// Classical normalized Lomb periodogram for unevenly spaced points.
Periodogram lomb(const std::vector<double>& t, const std::vector<double>& y,
                 const std::vector<double>& omegas);

// Default analysis grid: `bins` omegas, linear from low_omega_cutoff/2 to
// omega_max.
std::vector<double> default_omega_grid(double t_span, double omega_max,
                                       int bins);

// Local maxima above the low-omega cutoff with permutation p-values
// (y shuffled over fixed t); harmonics grouped around the strongest peak.
PeakReport detect_peaks(const Periodogram& pg, int surrogates,
                        std::uint64_t rng_seed);

// Same peak extraction and grouping, but p-values computed against a caller
// supplied null distribution of maximum powers (e.g. parametric bootstrap).
PeakReport detect_peaks_against_null(const Periodogram& pg,
                                     const std::vector<double>& null_max_powers);

// p = exp(2*pi/omega)
double scaling_ratio(double omega);

// Least-squares fit of A + B cos(omega ln S + phi) at fixed omega;
// B >= 0 and phi in [0, 2*pi).
struct LogPeriodicFit {
  double A = 0.0;
  double B = 0.0;
  double phi = 0.0;
};
LogPeriodicFit fit_logperiodic_residual(const ResidualSeries& series,
                                        double omega);

// Least-squares polynomial detrend (in t), returns y minus the trend.
std::vector<double> detrend_poly(const std::vector<double>& t,
                                 const std::vector<double>& y, int order);

// Divide y by a centered rolling-RMS envelope so slowly varying amplitude
// cannot dominate the periodogram; window_frac is the window width as a
// fraction of the t span.
std::vector<double> normalize_envelope(const std::vector<double>& t,
                                       const std::vector<double>& y,
                                       double window_frac);

}  // namespace dsiscan
