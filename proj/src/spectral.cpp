#include "dsiscan/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsiscan/rng.hpp"

namespace dsiscan {

namespace {

struct SeriesMoments {
  double mean = 0.0;
  double var = 0.0;  // sample variance (1/(N-1))
};

SeriesMoments moments(const std::vector<double>& y) {
  SeriesMoments m;
  const auto n = static_cast<double>(y.size());
  for (double v : y) m.mean += v;
  m.mean /= n;
  for (double v : y) m.var += (v - m.mean) * (v - m.mean);
  m.var /= (n - 1.0);
  return m;
}

void validate_series(const std::vector<double>& t,
                     const std::vector<double>& y) {
  if (t.size() != y.size()) throw InputError("spectral: t/y size mismatch");
  if (t.size() < 8) throw InputError("spectral: need at least 8 points");
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  if (!(*hi > *lo)) throw InputError("spectral: t values all equal");
}

bool uniform_spacing(const std::vector<double>& w) {
  if (w.size() < 3) return false;
  const double d = w[1] - w[0];
  for (std::size_t i = 2; i < w.size(); ++i) {
    if (std::fabs((w[i] - w[i - 1]) - d) > 1e-9 * std::max(1.0, std::fabs(d)))
      return false;
  }
  return d > 0.0;
}

// Power at one omega from the four trig sums over the centered series.
inline double power_from_sums(double cy, double sy, double c2, double s2,
                              double omega, double n, double var) {
  const double omega_tau = 0.5 * std::atan2(s2, c2);
  const double ct = std::cos(omega_tau);
  const double st = std::sin(omega_tau);
  // Rotate the sums into the tau frame where sine and cosine decouple.
  const double sc = cy * ct + sy * st;
  const double ssum = sy * ct - cy * st;
  const double c2t = c2 * std::cos(2.0 * omega_tau) +
                     s2 * std::sin(2.0 * omega_tau);
  const double sum_cos2 = 0.5 * (n + c2t);
  const double sum_sin2 = 0.5 * (n - c2t);
  double p = 0.0;
  if (sum_cos2 > 1e-12 * n) p += sc * sc / sum_cos2;
  if (sum_sin2 > 1e-12 * n) p += ssum * ssum / sum_sin2;
  (void)omega;
  return 0.5 * p / var;
}

// Direct evaluation, one omega at a time.
std::vector<double> lomb_direct(const std::vector<double>& t,
                                const std::vector<double>& yc, double var,
                                const std::vector<double>& omegas) {
  const auto n = static_cast<double>(t.size());
  std::vector<double> powers(omegas.size(), 0.0);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k];
    double cy = 0.0, sy = 0.0, c2 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double c = std::cos(w * t[i]);
      const double s = std::sin(w * t[i]);
      cy += yc[i] * c;
      sy += yc[i] * s;
      c2 += c * c - s * s;
      s2 += 2.0 * c * s;
    }
    powers[k] = power_from_sums(cy, sy, c2, s2, w, n, var);
  }
  return powers;
}

// Uniform omega grid: advance a per-point phasor by a fixed rotation instead
// of re-evaluating trig at every (point, omega) pair.
std::vector<double> lomb_uniform(const std::vector<double>& t,
                                 const std::vector<double>& yc, double var,
                                 const std::vector<double>& omegas) {
  const std::size_t n_pts = t.size();
  const std::size_t n_w = omegas.size();
  const double w0 = omegas.front();
  const double dw = omegas[1] - omegas[0];
  const auto n = static_cast<double>(n_pts);

  std::vector<double> cy(n_w, 0.0), sy(n_w, 0.0), c2(n_w, 0.0), s2(n_w, 0.0);
  for (std::size_t i = 0; i < n_pts; ++i) {
    const double ti = t[i];
    double c = std::cos(w0 * ti);
    double s = std::sin(w0 * ti);
    const double rc = std::cos(dw * ti);
    const double rs = std::sin(dw * ti);
    const double yi = yc[i];
    for (std::size_t k = 0; k < n_w; ++k) {
      cy[k] += yi * c;
      sy[k] += yi * s;
      c2[k] += c * c - s * s;
      s2[k] += 2.0 * c * s;
      const double cn = c * rc - s * rs;
      s = s * rc + c * rs;
      c = cn;
    }
  }
  std::vector<double> powers(n_w, 0.0);
  for (std::size_t k = 0; k < n_w; ++k) {
    powers[k] = power_from_sums(cy[k], sy[k], c2[k], s2[k], omegas[k], n, var);
  }
  return powers;
}

std::vector<double> lomb_powers(const std::vector<double>& t,
                                const std::vector<double>& y,
                                const std::vector<double>& omegas) {
  const auto m = moments(y);
  if (!(m.var > 0.0)) {
    throw InputError("spectral: constant series (zero variance)");
  }
  std::vector<double> yc(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yc[i] = y[i] - m.mean;
  if (uniform_spacing(omegas)) return lomb_uniform(t, yc, m.var, omegas);
  return lomb_direct(t, yc, m.var, omegas);
}

// Small dense linear solve (Gaussian elimination with partial pivoting).
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    if (std::fabs(a[piv][col]) < 1e-14) {
      throw InputError("spectral: singular design matrix");
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * x[c];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace

std::vector<double> default_omega_grid(double t_span, double omega_max,
                                       int bins) {
  if (!(t_span > 0.0) || bins < 2 || !(omega_max > 0.0)) {
    throw InputError("spectral: invalid omega grid request");
  }
  const double cutoff = 2.0 * M_PI / t_span;
  const double lo = cutoff / 2.0;
  std::vector<double> omegas(bins);
  const double step = (omega_max - lo) / static_cast<double>(bins - 1);
  for (int i = 0; i < bins; ++i) omegas[i] = lo + step * i;
  return omegas;
}

Periodogram lomb(const std::vector<double>& t, const std::vector<double>& y,
                 const std::vector<double>& omegas) {
  validate_series(t, y);
  if (omegas.empty()) throw InputError("spectral: empty omega grid");
  for (double w : omegas) {
    if (!(w > 0.0)) throw InputError("spectral: nonpositive omega");
  }
  Periodogram pg;
  pg.omegas = omegas;
  pg.powers = lomb_powers(t, y, omegas);
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  pg.low_omega_cutoff = 2.0 * M_PI / (*hi - *lo);
  pg.t = t;
  pg.y = y;
  return pg;
}

LombPlan::LombPlan(const std::vector<double>& t,
                   const std::vector<double>& omegas)
    : omegas_(omegas), n_(t.size()) {
  if (n_ < 2 || omegas.empty()) throw InputError("spectral: invalid plan");
  const std::size_t n_w = omegas.size();
  cos_tab_.resize(n_w * n_);
  sin_tab_.resize(n_w * n_);
  cc_.resize(n_w);
  ss_.resize(n_w);
  for (std::size_t k = 0; k < n_w; ++k) {
    const double w = omegas[k];
    double c2 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      c2 += std::cos(2.0 * w * t[i]);
      s2 += std::sin(2.0 * w * t[i]);
    }
    const double tau = 0.5 * std::atan2(s2, c2) / w;
    double cc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double c = std::cos(w * (t[i] - tau));
      const double s = std::sin(w * (t[i] - tau));
      cos_tab_[k * n_ + i] = c;
      sin_tab_[k * n_ + i] = s;
      cc += c * c;
      ss += s * s;
    }
    cc_[k] = cc;
    ss_[k] = ss;
  }
}

std::vector<double> LombPlan::power(const std::vector<double>& y) const {
  if (y.size() != n_) throw InputError("spectral: plan size mismatch");
  const auto m = moments(y);
  if (!(m.var > 0.0)) {
    throw InputError("spectral: constant series (zero variance)");
  }
  std::vector<double> powers(omegas_.size(), 0.0);
  for (std::size_t k = 0; k < omegas_.size(); ++k) {
    const double* ct = &cos_tab_[k * n_];
    const double* st = &sin_tab_[k * n_];
    double sc = 0.0, ssum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double yc = y[i] - m.mean;
      sc += yc * ct[i];
      ssum += yc * st[i];
    }
    double p = 0.0;
    if (cc_[k] > 1e-12 * static_cast<double>(n_)) p += sc * sc / cc_[k];
    if (ss_[k] > 1e-12 * static_cast<double>(n_)) p += ssum * ssum / ss_[k];
    powers[k] = 0.5 * p / m.var;
  }
  return powers;
}

double LombPlan::max_power(const std::vector<double>& y,
                           double omega_min) const {
  const auto powers = power(y);
  double best = 0.0;
  for (std::size_t k = 0; k < powers.size(); ++k) {
    if (omegas_[k] > omega_min && powers[k] > best) best = powers[k];
  }
  return best;
}

namespace {

constexpr std::size_t kMaxReportedPeaks = 20;
constexpr double kHarmonicTolerance = 0.15;  // per harmonic order

PeakReport build_report(const Periodogram& pg,
                        const std::vector<double>& null_max_powers) {
  PeakReport report;
  report.exclusion_reason = "wavelength spans entire range";

  std::vector<Peak> maxima;
  for (std::size_t i = 1; i + 1 < pg.powers.size(); ++i) {
    if (pg.powers[i] > pg.powers[i - 1] && pg.powers[i] >= pg.powers[i + 1]) {
      if (pg.omegas[i] > pg.low_omega_cutoff) {
        maxima.push_back({pg.omegas[i], pg.powers[i], 1.0});
      } else {
        report.excluded_below_cutoff.push_back(pg.omegas[i]);
      }
    }
  }
  std::sort(maxima.begin(), maxima.end(),
            [](const Peak& a, const Peak& b) { return a.power > b.power; });
  if (maxima.size() > kMaxReportedPeaks) maxima.resize(kMaxReportedPeaks);

  const auto n_sur = static_cast<double>(null_max_powers.size());
  for (auto& peak : maxima) {
    std::size_t exceed = 0;
    for (double m : null_max_powers) {
      if (m >= peak.power) ++exceed;
    }
    peak.p_value = (1.0 + static_cast<double>(exceed)) / (n_sur + 1.0);
  }
  report.peaks = maxima;

  if (!maxima.empty()) {
    HarmonicGroup group;
    group.fundamental = maxima.front().omega;
    for (const auto& peak : maxima) {
      const double k = std::round(peak.omega / group.fundamental);
      if (k >= 1.0 && std::fabs(peak.omega - k * group.fundamental) <=
                          kHarmonicTolerance * k * group.fundamental) {
        group.members.push_back(peak.omega);
      }
    }
    std::sort(group.members.begin(), group.members.end());
    report.harmonic_groups.push_back(std::move(group));
  }
  for (const auto& peak : report.peaks) {
    report.scaling_ratios.push_back(scaling_ratio(peak.omega));
  }
  return report;
}

}  // namespace

PeakReport detect_peaks(const Periodogram& pg, int surrogates,
                        std::uint64_t rng_seed) {
  if (surrogates < 100) {
    throw InputError("spectral: need at least 100 surrogates");
  }
  LombPlan plan(pg.t, pg.omegas);
  CounterRng rng(rng_seed);
  std::vector<double> shuffled = pg.y;
  std::vector<double> null_max(surrogates, 0.0);
  for (int s = 0; s < surrogates; ++s) {
    // Fisher-Yates over y, t fixed.
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next_bits() % i);
      std::swap(shuffled[i - 1], shuffled[j]);
    }
    null_max[s] = plan.max_power(shuffled, pg.low_omega_cutoff);
  }
  return build_report(pg, null_max);
}

PeakReport detect_peaks_against_null(
    const Periodogram& pg, const std::vector<double>& null_max_powers) {
  if (null_max_powers.size() < 100) {
    throw InputError("spectral: need at least 100 surrogates");
  }
  return build_report(pg, null_max_powers);
}

double scaling_ratio(double omega) {
  if (!(omega > 0.0)) throw InputError("spectral: nonpositive omega");
  return std::exp(2.0 * M_PI / omega);
}

LogPeriodicFit fit_logperiodic_residual(const ResidualSeries& series,
                                        double omega) {
  if (series.points.size() < 8) {
    throw InputError("spectral: need at least 8 points");
  }
  if (!(omega > 0.0)) throw InputError("spectral: nonpositive omega");
  // Model: A + u*cos(w x) + v*sin(w x), then B = |(u,v)|, phi = atan2(-v, u).
  double s_c = 0.0, s_s = 0.0, s_cc = 0.0, s_ss = 0.0, s_cs = 0.0;
  double s_y = 0.0, s_yc = 0.0, s_ys = 0.0;
  const auto n = static_cast<double>(series.points.size());
  for (const auto& p : series.points) {
    const double c = std::cos(omega * p.ln_size);
    const double s = std::sin(omega * p.ln_size);
    s_c += c;
    s_s += s;
    s_cc += c * c;
    s_ss += s * s;
    s_cs += c * s;
    s_y += p.delta_f;
    s_yc += p.delta_f * c;
    s_ys += p.delta_f * s;
  }
  const auto x = solve_dense({{n, s_c, s_s}, {s_c, s_cc, s_cs}, {s_s, s_cs, s_ss}},
                             {s_y, s_yc, s_ys});
  LogPeriodicFit fit;
  fit.A = x[0];
  fit.B = std::hypot(x[1], x[2]);
  fit.phi = std::atan2(-x[2], x[1]);
  if (fit.phi < 0.0) fit.phi += 2.0 * M_PI;
  return fit;
}

std::vector<double> detrend_poly(const std::vector<double>& t,
                                 const std::vector<double>& y, int order) {
  if (t.size() != y.size() || t.empty()) {
    throw InputError("spectral: detrend size mismatch");
  }
  if (order < 0 || order > 8) throw InputError("spectral: bad detrend order");
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  const double mid = 0.5 * (*lo + *hi);
  const double half = std::max(0.5 * (*hi - *lo), 1e-300);

  const std::size_t p = static_cast<std::size_t>(order) + 1;
  std::vector<std::vector<double>> ata(p, std::vector<double>(p, 0.0));
  std::vector<double> atb(p, 0.0);
  std::vector<double> basis(p);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = (t[i] - mid) / half;
    basis[0] = 1.0;
    for (std::size_t k = 1; k < p; ++k) basis[k] = basis[k - 1] * u;
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) ata[r][c] += basis[r] * basis[c];
      atb[r] += basis[r] * y[i];
    }
  }
  const auto coef = solve_dense(ata, atb);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double u = (t[i] - mid) / half;
    double trend = 0.0;
    for (std::size_t k = p; k-- > 0;) trend = trend * u + coef[k];
    out[i] = y[i] - trend;
  }
  return out;
}

std::vector<double> normalize_envelope(const std::vector<double>& t,
                                       const std::vector<double>& y,
                                       double window_frac) {
  if (t.size() != y.size() || t.empty()) {
    throw InputError("spectral: envelope size mismatch");
  }
  if (!(window_frac > 0.0 && window_frac <= 1.0)) {
    throw InputError("spectral: window_frac must lie in (0,1]");
  }
  const double span = t.back() - t.front();
  const double half_w = 0.5 * window_frac * span;

  double global_ms = 0.0;
  for (double v : y) global_ms += v * v;
  global_ms /= static_cast<double>(y.size());
  if (!(global_ms > 0.0)) return y;
  const double floor_rms = 0.05 * std::sqrt(global_ms);

  std::vector<double> out(y.size());
  std::size_t lo = 0, hi = 0;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    while (hi < y.size() && t[hi] <= t[i] + half_w) {
      acc += y[hi] * y[hi];
      ++count;
      ++hi;
    }
    while (lo < hi && t[lo] < t[i] - half_w) {
      acc -= y[lo] * y[lo];
      --count;
      ++lo;
    }
    const double rms = std::sqrt(std::max(acc, 0.0) /
                                 static_cast<double>(std::max<std::size_t>(count, 1)));
    out[i] = y[i] / std::max(rms, floor_rms);
  }
  return out;
}

}  // namespace dsiscan
