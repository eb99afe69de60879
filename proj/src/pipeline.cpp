#include "dsiscan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "dsiscan/dataio.hpp"
#include "dsiscan/rng.hpp"

namespace dsiscan {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> lognormal_draws(const LognormalFit& fit, std::size_t count,
                                    const CounterRng& rng) {
  std::vector<double> logs(count);
  for (std::size_t i = 0; i < count; ++i) {
    logs[i] = fit.mu + fit.sigma * rng.normal(i);
  }
  return logs;
}

struct ConditionedSeries {
  std::vector<double> grid;
  std::vector<double> values;
};

// Exponential-family density exp(poly(t)) on the observed ln-size range,
// fitted by maximum likelihood. A low-degree polynomial log-density tracks
// the smooth trend (power-law tails are linear in ln S, lognormal bodies
// quadratic) but cannot follow a log-periodic ripple, which makes it the
// null model for the density-route significance test.
struct ExpPolyDensity {
  double a = 0.0, b = 1.0;            // ln-size range, t = (x - a) / (b - a)
  std::vector<double> coeffs;         // c_1..c_d, log-density sum c_k t^k
  std::vector<double> cdf_grid;       // t values of the tabulated CDF
  std::vector<double> cdf;            // normalized CDF at cdf_grid

  double inverse_cdf(double u) const {
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.begin()) return a;
    if (it == cdf.end()) return b;
    const std::size_t k = static_cast<std::size_t>(it - cdf.begin());
    const double c0 = cdf[k - 1], c1 = cdf[k];
    const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
    const double t = cdf_grid[k - 1] + frac * (cdf_grid[k] - cdf_grid[k - 1]);
    return a + t * (b - a);
  }
};

ExpPolyDensity fit_exp_poly(const std::vector<double>& logs, int degree) {
  ExpPolyDensity out;
  const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
  out.a = *lo_it;
  out.b = *hi_it;
  const double span = out.b - out.a;
  const std::size_t n = logs.size();
  const int d = degree;

  // Data moments of t^k.
  std::vector<double> data_mom(d + 1, 0.0);
  for (double x : logs) {
    const double t = (x - out.a) / span;
    double p = 1.0;
    for (int k = 1; k <= d; ++k) {
      p *= t;
      data_mom[k] += p;
    }
  }
  for (int k = 1; k <= d; ++k) data_mom[k] /= static_cast<double>(n);

  // Quadrature grid for the normalizer and model moments.
  const int m = 1024;
  std::vector<double> tg(m), w(m, 1.0);
  for (int i = 0; i < m; ++i) tg[i] = static_cast<double>(i) / (m - 1);
  w.front() = w.back() = 0.5;

  std::vector<double> c(d, 0.0);  // c[k-1] multiplies t^k
  std::vector<double> dens(m);
  for (int iter = 0; iter < 50; ++iter) {
    double gmax = -1e300;
    for (int i = 0; i < m; ++i) {
      double g = 0.0, p = 1.0;
      for (int k = 1; k <= d; ++k) {
        p *= tg[i];
        g += c[k - 1] * p;
      }
      dens[i] = g;
      gmax = std::max(gmax, g);
    }
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
      dens[i] = w[i] * std::exp(dens[i] - gmax);
      z += dens[i];
    }
    // Model moments E[t^k] and covariances Cov(t^j, t^k).
    std::vector<double> mom(2 * d + 1, 0.0);
    for (int i = 0; i < m; ++i) {
      double p = dens[i] / z;
      for (int k = 1; k <= 2 * d; ++k) {
        p *= tg[i];
        mom[k] += p;
      }
    }
    std::vector<double> grad(d);
    std::vector<std::vector<double>> hess(d, std::vector<double>(d));
    double gnorm = 0.0;
    for (int j = 1; j <= d; ++j) {
      grad[j - 1] = data_mom[j] - mom[j];
      gnorm = std::max(gnorm, std::fabs(grad[j - 1]));
      for (int k = 1; k <= d; ++k) {
        hess[j - 1][k - 1] = mom[j + k] - mom[j] * mom[k];
      }
    }
    if (gnorm < 1e-12) break;
    // Solve hess * step = grad (Gaussian elimination, small ridge).
    for (int j = 0; j < d; ++j) hess[j][j] += 1e-12;
    std::vector<double> step = grad;
    for (int j = 0; j < d; ++j) {
      int piv = j;
      for (int k = j + 1; k < d; ++k) {
        if (std::fabs(hess[k][j]) > std::fabs(hess[piv][j])) piv = k;
      }
      std::swap(hess[j], hess[piv]);
      std::swap(step[j], step[piv]);
      for (int k = j + 1; k < d; ++k) {
        const double f = hess[k][j] / hess[j][j];
        for (int l = j; l < d; ++l) hess[k][l] -= f * hess[j][l];
        step[k] -= f * step[j];
      }
    }
    for (int j = d - 1; j >= 0; --j) {
      for (int k = j + 1; k < d; ++k) step[j] -= hess[j][k] * step[k];
      step[j] /= hess[j][j];
    }
    // Damp large steps to keep the normalizer finite.
    double smax = 0.0;
    for (double s : step) smax = std::max(smax, std::fabs(s));
    const double damp = smax > 10.0 ? 10.0 / smax : 1.0;
    for (int j = 0; j < d; ++j) c[j] += damp * step[j];
  }
  out.coeffs = c;

  // Tabulate the CDF for inverse sampling.
  const int mc = 4096;
  out.cdf_grid.resize(mc);
  out.cdf.resize(mc);
  double gmax = -1e300;
  std::vector<double> g(mc);
  for (int i = 0; i < mc; ++i) {
    const double t = static_cast<double>(i) / (mc - 1);
    out.cdf_grid[i] = t;
    double v = 0.0, p = 1.0;
    for (int k = 1; k <= d; ++k) {
      p *= t;
      v += c[k - 1] * p;
    }
    g[i] = v;
    gmax = std::max(gmax, v);
  }
  double acc = 0.0;
  out.cdf[0] = 0.0;
  for (int i = 1; i < mc; ++i) {
    acc += 0.5 * (std::exp(g[i - 1] - gmax) + std::exp(g[i] - gmax));
    out.cdf[i] = acc;
  }
  for (int i = 0; i < mc; ++i) out.cdf[i] /= acc;
  return out;
}

// Condition the (H,q)-derivative for the periodogram. The derivative of a
// decaying density carries an exponential amplitude envelope that would
// drown the oscillation, so it is rescaled to the relative form
// D * ((1-q)x)^H / f, with a Tikhonov-regularized reciprocal that smoothly
// suppresses sparse-tail grid points (where fewer than taper_count sample
// points fall inside a bandwidth window the KDE is noise). Grid points
// within the kernel roll-off of either edge are dropped, and a low-order
// polynomial trend is removed. Applied identically to the observed series
// and to every surrogate so the significance test stays exchangeable.
ConditionedSeries condition_derivative(const DensityEstimate& den,
                                       const DerivativeSeries& der,
                                       std::size_t sample_count,
                                       const PipelineConfig& cfg) {
  const double h = den.bandwidth;
  const double eps =
      cfg.taper_count / (2.0 * static_cast<double>(sample_count) * h);
  const double edge = 8.0 * h;
  const double lo = den.grid.front() - std::log(cfg.rep_q) + edge;
  const double hi = den.grid.back() - edge;
  const std::size_t offset = den.grid.size() - der.grid.size();

  ConditionedSeries out;
  for (std::size_t i = 0; i < der.grid.size(); ++i) {
    if (der.grid[i] < lo || der.grid[i] > hi) continue;
    const double x = std::exp(der.grid[i]);
    const double f = den.density[i + offset];
    const double scale = std::pow((1.0 - cfg.rep_q) * x, cfg.rep_H);
    out.grid.push_back(der.grid[i]);
    out.values.push_back(der.values[i] * scale * f / (f * f + eps * eps));
  }
  if (out.grid.size() < 32) {
    // Degenerately short span: fall back to the untrimmed series (the mask
    // depends only on the fixed grid, so the choice is data-independent).
    out.grid = der.grid;
    out.values.resize(der.grid.size());
    for (std::size_t i = 0; i < der.grid.size(); ++i) {
      const double x = std::exp(der.grid[i]);
      const double f = den.density[i + offset];
      const double scale = std::pow((1.0 - cfg.rep_q) * x, cfg.rep_H);
      out.values[i] = der.values[i] * scale * f / (f * f + eps * eps);
    }
  }
  out.values = detrend_poly(out.grid, out.values, cfg.detrend_order);
  return out;
}

void summarize_route(RouteResult& route) {
  route.fundamental = 0.0;
  route.p_value = 1.0;
  route.max_power = 0.0;
  if (!route.report.peaks.empty()) {
    route.fundamental = route.report.peaks.front().omega;
    route.p_value = route.report.peaks.front().p_value;
    route.max_power = route.report.peaks.front().power;
  }
}

// Lomb of the CCDF residuals; null = lognormal samples of the same size run
// through fit -> residuals -> Lomb.
RouteResult residual_route(const SizeSample& sample, const LognormalFit& fit,
                           const PipelineConfig& cfg) {
  const ResidualSeries res = residuals(sample, fit);
  std::vector<double> t, y;
  t.reserve(res.points.size());
  for (const auto& p : res.points) {
    t.push_back(p.ln_size);
    y.push_back(p.delta_f);
  }
  const double span = t.back() - t.front();
  const auto omegas = default_omega_grid(span, cfg.omega_max, cfg.omega_bins);

  RouteResult route;
  route.periodogram = lomb(t, y, omegas);

  CounterRng rng = CounterRng(cfg.seed).substream(1);
  std::vector<double> null_max(cfg.surrogates, 0.0);
  const std::size_t n = sample.size();
  for (int s = 0; s < cfg.surrogates; ++s) {
    const auto logs = lognormal_draws(fit, n, rng.substream(s));
    SizeSample surrogate;
    surrogate.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      surrogate.entries.push_back({"s" + std::to_string(i), std::exp(logs[i])});
    }
    const auto sfit = fit_lognormal(surrogate);
    const auto sres = residuals(surrogate, sfit);
    std::vector<double> st, sy;
    st.reserve(sres.points.size());
    for (const auto& p : sres.points) {
      st.push_back(p.ln_size);
      sy.push_back(p.delta_f);
    }
    const auto spg = lomb(st, sy, omegas);
    double best = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
      if (omegas[k] > spg.low_omega_cutoff && spg.powers[k] > best) {
        best = spg.powers[k];
      }
    }
    null_max[s] = best;
  }
  route.report = detect_peaks_against_null(route.periodogram, null_max);
  summarize_route(route);
  return route;
}

// KDE -> (H,q)-derivative -> conditioning -> Lomb. The null is a smooth
// parametric bootstrap: an exp(polynomial) density fitted to the observed
// log sizes, sampled by inverse CDF, then run through the identical chain
// on the same grid. The surrogates carry the smooth trend of the data but
// no log-periodic ripple, so their maximum periodogram power calibrates
// what the chain produces from sampling noise alone.
RouteResult density_route(const SizeSample& sample,
                          const DensityEstimate& analysis_density,
                          const PipelineConfig& cfg) {
  const std::size_t n = sample.size();
  const auto rep = hq_derivative(analysis_density, cfg.rep_H, cfg.rep_q);
  const auto conditioned = condition_derivative(analysis_density, rep, n, cfg);
  const double span = conditioned.grid.back() - conditioned.grid.front();
  const auto omegas = default_omega_grid(span, cfg.omega_max, cfg.omega_bins);

  RouteResult route;
  route.periodogram = lomb(conditioned.grid, conditioned.values, omegas);

  const LombPlan plan(conditioned.grid, omegas);
  const auto null_model = fit_exp_poly(sample.log_sizes(), cfg.null_degree);
  CounterRng rng = CounterRng(cfg.seed).substream(2);
  std::vector<double> null_max(cfg.surrogates, 0.0);
  for (int s = 0; s < cfg.surrogates; ++s) {
    const CounterRng sub = rng.substream(s);
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) {
      logs[i] = null_model.inverse_cdf(sub.uniform(i));
    }
    DensityEstimate sden;
    sden.grid = analysis_density.grid;
    sden.bandwidth = analysis_density.bandwidth;
    sden.density = kde_on_grid(logs, sden.bandwidth, sden.grid);
    const auto sder = hq_derivative(sden, cfg.rep_H, cfg.rep_q);
    const auto scond = condition_derivative(sden, sder, n, cfg);
    null_max[s] = plan.max_power(scond.values,
                                 route.periodogram.low_omega_cutoff);
  }
  route.report = detect_peaks_against_null(route.periodogram, null_max);
  summarize_route(route);
  return route;
}

ordered_json route_to_json(const RouteResult& route) {
  ordered_json j;
  j["fundamental_omega"] = route.fundamental;
  j["p_value"] = route.p_value;
  j["max_power"] = route.max_power;
  j["scaling_ratio"] =
      route.fundamental > 0.0 ? scaling_ratio(route.fundamental) : 0.0;
  j["low_omega_cutoff"] = route.periodogram.low_omega_cutoff;
  ordered_json peaks = ordered_json::array();
  for (const auto& p : route.report.peaks) {
    peaks.push_back({{"omega", p.omega},
                     {"power", p.power},
                     {"p_value", p.p_value},
                     {"scaling_ratio", scaling_ratio(p.omega)}});
  }
  j["peaks"] = peaks;
  ordered_json groups = ordered_json::array();
  for (const auto& g : route.report.harmonic_groups) {
    groups.push_back({{"fundamental", g.fundamental}, {"members", g.members}});
  }
  j["harmonic_groups"] = groups;
  j["excluded_below_cutoff"] = route.report.excluded_below_cutoff;
  j["exclusion_reason"] = route.report.exclusion_reason;
  return j;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_outputs(const SizeSample& sample, const HoldingsTable* holdings,
                   const ReturnsTable* returns, const PipelineConfig& cfg,
                   const AnalyzeResult& result,
                   const DensityEstimate& analysis_density,
                   const ordered_json& report) {
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  auto path = [&](const char* name) { return (out / name).string(); };

  write_series_csv(path("ccdf.csv"), "size", "ccdf", empirical_ccdf(sample));

  {
    std::vector<std::pair<double, double>> rows;
    for (const auto& p : residuals(sample, result.fit).points) {
      rows.emplace_back(p.ln_size, p.delta_f);
    }
    write_series_csv(path("residuals.csv"), "ln_size", "delta_f", rows);
  }
  {
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < result.density.grid.size(); ++i) {
      rows.emplace_back(result.density.grid[i], result.density.density[i]);
    }
    write_series_csv(path("kde.csv"), "ln_size", "density", rows);
  }
  {
    std::ofstream f(path("hq_derivative.csv"));
    f << "ln_size,value,H,q\n";
    auto dump_series = [&](const DerivativeSeries& d) {
      for (std::size_t i = 0; i < d.grid.size(); ++i) {
        f << format_full(d.grid[i]) << ',' << format_full(d.values[i]) << ','
          << format_full(d.H) << ',' << format_full(d.q) << '\n';
      }
    };
    if (cfg.emit_hq_scan) {
      for (const auto& d : hq_scan(analysis_density)) dump_series(d);
    } else {
      dump_series(hq_derivative(analysis_density, cfg.rep_H, cfg.rep_q));
    }
  }
  {
    std::vector<std::pair<double, double>> rows;
    const auto& pg = result.density_route.periodogram;
    for (std::size_t i = 0; i < pg.omegas.size(); ++i) {
      rows.emplace_back(pg.omegas[i], pg.powers[i]);
    }
    write_series_csv(path("periodogram.csv"), "omega", "power", rows);
  }
  {
    ordered_json peaks;
    peaks["residual"] = route_to_json(result.residual_route);
    peaks["density"] = route_to_json(result.density_route);
    write_text_file(path("peaks.json"), peaks.dump(2) + "\n");
  }
  {
    ordered_json layers;
    layers["boundaries"] = result.partition.boundaries;
    layers["ratios"] = result.partition.ratios;
    layers["mean_ratio"] = result.stats.mean_ratio;
    ordered_json rows = ordered_json::array();
    for (const auto& r : result.stats.rows) {
      rows.push_back({{"layer", r.layer},
                      {"count", r.count},
                      {"mean_holdings", r.mean_holdings},
                      {"upper_bound", std::isfinite(r.upper_bound)
                                          ? ordered_json(r.upper_bound)
                                          : ordered_json(nullptr)},
                      {"ratio_to_previous", r.ratio_to_previous}});
    }
    layers["rows"] = rows;
    write_text_file(path("layers.json"), layers.dump(2) + "\n");
  }
  {
    std::ofstream f(path("assignments.csv"));
    f << "entity_id,layer\n";
    for (const auto& [entity, layer] : result.partition.assignments) {
      f << entity << ',' << layer << '\n';
    }
  }

  if (holdings) {
    const auto matrix = layer_similarity_matrix(result.partition, *holdings);
    {
      std::ofstream f(path("similarity_matrix.csv"));
      // L x L percentages, blank where undefined
      for (int i = 0; i < matrix.layers; ++i) {
        for (int j = 0; j < matrix.layers; ++j) {
          if (j) f << ',';
          const double v = matrix.values[i][j];
          if (std::isfinite(v)) f << format_full(100.0 * v);
        }
        f << '\n';
      }
    }
    const auto adj = adjacency(result.partition, *holdings);
    auto dump_matrix = [&](const char* name, auto getter) {
      std::ofstream f(path(name));
      f << "layer";
      for (const auto& h : adj.holding_order) f << ',' << h;
      f << '\n';
      for (std::size_t b = 0; b < adj.m_frac.size(); ++b) {
        f << (b + 1);
        for (std::size_t c = 0; c < adj.holding_order.size(); ++c) {
          f << ',' << getter(b, c);
        }
        f << '\n';
      }
    };
    dump_matrix("adjacency_bin.csv",
                [&](std::size_t b, std::size_t c) {
                  return std::to_string(adj.m_bin[b][c]);
                });
    dump_matrix("adjacency_frac.csv",
                [&](std::size_t b, std::size_t c) {
                  return format_full(adj.m_frac[b][c]);
                });
    {
      std::map<std::string, double> caps;
      for (const auto& p : holdings->positions) {
        if (p.market_cap_usd) caps[p.asset_id] = *p.market_cap_usd;
      }
      std::ofstream f(path("ubiquity.csv"));
      f << "asset_id,rank,ubiquity_count,market_cap\n";
      for (std::size_t c = 0; c < adj.holding_order.size(); ++c) {
        const auto& asset = adj.holding_order[c];
        f << asset << ',' << (c + 1) << ',' << adj.ubiquity[c] << ',';
        const auto it = caps.find(asset);
        if (it != caps.end()) f << format_full(it->second);
        f << '\n';
      }
    }
  }
  if (returns) {
    const auto perf =
        layer_performance(result.partition, *returns, cfg.periods_per_year);
    ordered_json j;
    ordered_json rows = ordered_json::array();
    for (const auto& r : perf.layer_rows) {
      rows.push_back({{"layer", r.layer},
                      {"count", r.count},
                      {"min", r.min},
                      {"q1", r.q1},
                      {"median", r.median},
                      {"q3", r.q3},
                      {"max", r.max}});
    }
    j["layer_rows"] = rows;
    j["entities_without_returns"] = perf.entities_without_returns;
    j["entities_below_min_obs"] = perf.entities_below_min_obs;
    write_text_file(path("performance.json"), j.dump(2) + "\n");
  }

  write_text_file(path("report.json"), report.dump(2) + "\n");
}

}  // namespace

std::vector<double> PipelineConfig::bandwidth_candidates() const {
  if (!bandwidths.empty()) return bandwidths;
  std::vector<double> out;
  const int count = 10;
  const double lo = 0.05, hi = 1.0;
  for (int i = 0; i < count; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  }
  return out;
}

void PipelineConfig::validate() const {
  if (surrogates < 100) throw InputError("cli: surrogates must be >= 100");
  if (omega_bins < 16) throw InputError("cli: omega_bins must be >= 16");
  if (!(omega_max > 0.0)) throw InputError("cli: omega_max must be positive");
  if (grid_size < 64) throw InputError("cli: grid_size must be >= 64");
  if (!(layer_ratio > 0.0)) throw InputError("cli: layer_ratio must be positive");
  if (periods_per_year < 1) throw InputError("cli: bad periods_per_year");
  for (double h : bandwidths) {
    if (!(h > 0.0)) throw InputError("cli: nonpositive bandwidth candidate");
  }
}

RouteResult detect_dsi(const SizeSample& sample, const PipelineConfig& cfg) {
  cfg.validate();
  const double h = select_bandwidth_cv(sample, cfg.bandwidth_candidates());
  const DensityEstimate analysis_density = kde(sample, h / 2.0, cfg.grid_size);
  return density_route(sample, analysis_density, cfg);
}

AnalyzeResult analyze_sample(const SizeSample& sample,
                             const HoldingsTable* holdings,
                             const ReturnsTable* returns,
                             const PipelineConfig& cfg) {
  cfg.validate();
  AnalyzeResult result;
  result.fit = fit_lognormal(sample);
  result.cv_bandwidth =
      select_bandwidth_cv(sample, cfg.bandwidth_candidates());
  // The DSI stage runs at half the CV bandwidth: the oscillation survives
  // smoothing there while the CV estimate is the one reported as the density.
  result.analysis_bandwidth = result.cv_bandwidth / 2.0;
  result.density = kde(sample, result.cv_bandwidth, cfg.grid_size);
  const DensityEstimate analysis_density =
      kde(sample, result.analysis_bandwidth, cfg.grid_size);

  result.residual_route = residual_route(sample, result.fit, cfg);
  result.density_route =
      density_route(sample, analysis_density, cfg);

  {
    auto partition = partition_from_density(analysis_density, cfg.layer_ratio,
                                            cfg.layer_tolerance);
    result.partition = assign(sample, partition.boundaries);
  }
  result.stats =
      layer_stats(result.partition, holdings ? *holdings : HoldingsTable{});

  ordered_json report;
  report["config"] = {{"seed", cfg.seed},
                      {"surrogates", cfg.surrogates},
                      {"omega_max", cfg.omega_max},
                      {"omega_bins", cfg.omega_bins},
                      {"grid_size", cfg.grid_size},
                      {"layer_ratio", cfg.layer_ratio},
                      {"layer_tolerance", cfg.layer_tolerance},
                      {"periods_per_year", cfg.periods_per_year}};
  report["sample"] = {{"count", sample.size()},
                      {"currency", sample.currency_label}};
  report["lognormal_fit"] = {{"mu", result.fit.mu},
                             {"sigma", result.fit.sigma},
                             {"log_likelihood", result.fit.log_likelihood},
                             {"implied_mean", result.fit.implied_mean},
                             {"implied_log_mode", result.fit.implied_log_mode}};
  report["bandwidth"] = {{"cv_selected", result.cv_bandwidth},
                         {"analysis", result.analysis_bandwidth}};
  report["spectral"] = {{"residual", route_to_json(result.residual_route)},
                        {"density", route_to_json(result.density_route)}};
  {
    ordered_json layers;
    layers["boundaries"] = result.partition.boundaries;
    layers["ratios"] = result.partition.ratios;
    layers["mean_ratio"] = result.stats.mean_ratio;
    layers["entities_without_holdings"] =
        result.stats.entities_without_holdings.size();
    report["layers"] = layers;
  }

  if (holdings) {
    result.portfolio_skipped = false;
    const auto matrix = layer_similarity_matrix(result.partition, *holdings);
    ordered_json sim = ordered_json::array();
    for (const auto& row : matrix.values) {
      ordered_json r = ordered_json::array();
      for (double v : row) {
        r.push_back(std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr));
      }
      sim.push_back(r);
    }
    ordered_json pf;
    pf["similarity_matrix"] = sim;

    std::size_t missing_caps = 0;
    try {
      const auto market = market_portfolio(*holdings, &missing_caps);
      const auto portfolios = holdings->by_entity();
      std::vector<double> sim_m_sum(result.partition.layer_count(), 0.0);
      std::vector<std::size_t> sim_m_n(result.partition.layer_count(), 0);
      for (const auto& [entity, layer] : result.partition.assignments) {
        const auto it = portfolios.find(entity);
        if (it == portfolios.end()) continue;
        sim_m_sum[layer - 1] += similarity(it->second, market);
        sim_m_n[layer - 1] += 1;
      }
      ordered_json sim_m = ordered_json::array();
      for (std::size_t i = 0; i < sim_m_sum.size(); ++i) {
        sim_m.push_back(sim_m_n[i] > 0
                            ? ordered_json(sim_m_sum[i] /
                                           static_cast<double>(sim_m_n[i]))
                            : ordered_json(nullptr));
      }
      pf["sim_market_by_layer"] = sim_m;
      pf["assets_missing_cap"] = missing_caps;
    } catch (const InputError&) {
      pf["sim_market_by_layer"] = nullptr;
    }
    try {
      const auto fit = ubiquity_cap_fit(*holdings);
      pf["ubiquity_cap_fit"] = {{"alpha", fit.alpha},
                                {"stderr", fit.stderr_alpha},
                                {"x_min", fit.x_min},
                                {"tail_count", fit.tail_count}};
    } catch (const InputError& e) {
      pf["ubiquity_cap_fit"] = {{"skipped", e.what()}};
    }
    report["portfolio"] = pf;
  } else {
    report["portfolio"] = {{"skipped", "no holdings input"}};
  }

  if (returns) {
    result.performance_skipped = false;
    const auto perf =
        layer_performance(result.partition, *returns, cfg.periods_per_year);
    ordered_json rows = ordered_json::array();
    for (const auto& r : perf.layer_rows) {
      rows.push_back({{"layer", r.layer},
                      {"count", r.count},
                      {"median", r.median},
                      {"q1", r.q1},
                      {"q3", r.q3}});
    }
    report["performance"] = {{"layer_rows", rows}};
  } else {
    report["performance"] = {{"skipped", "no returns input"}};
  }

  result.report_json = report.dump(2) + "\n";
  if (!cfg.out_dir.empty()) {
    const DensityEstimate half = kde(sample, result.analysis_bandwidth,
                                     cfg.grid_size);
    write_outputs(sample, holdings, returns, cfg, result, half, report);
  }
  return result;
}

AnalyzeResult run_analyze(const PipelineConfig& cfg) {
  if (cfg.sizes_path.empty()) {
    throw InputError("cli: --sizes is required for analyze");
  }
  const SizeSample sample = load_sizes(cfg.sizes_path);
  HoldingsTable holdings;
  ReturnsTable returns;
  const bool have_holdings = !cfg.holdings_path.empty();
  const bool have_returns = !cfg.returns_path.empty();
  if (have_holdings) holdings = load_holdings(cfg.holdings_path);
  if (have_returns) returns = load_returns(cfg.returns_path);
  return analyze_sample(sample, have_holdings ? &holdings : nullptr,
                        have_returns ? &returns : nullptr, cfg);
}

void run_synth(const GrowthModelParams& params, double s_min, double s_max,
               int count, std::uint64_t seed, const std::string& out_dir) {
  params.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const SizeSample sample =
      sample_logperiodic(params, s_min, s_max, count, seed);
  save_sizes(sample, (fs::path(out_dir) / "sizes.csv").string());

  ordered_json truth;
  truth["n"] = params.n;
  truth["T0"] = params.T0;
  truth["gamma"] = params.gamma;
  truth["kappa"] = params.kappa;
  truth["w0"] = params.w0;
  truth["w1"] = params.w1;
  truth["exponent_m"] = params.exponent_m();
  truth["predicted_omega"] = predict_omega(params.gamma, params.kappa);
  truth["log_periodicity"] = params.w1 != 0.0;
  if (params.w1 == 0.0) truth["note"] = "no log-periodicity";
  truth["s_min"] = s_min;
  truth["s_max"] = s_max;
  truth["count"] = count;
  truth["seed"] = seed;
  write_text_file((fs::path(out_dir) / "ground_truth.json").string(),
                  truth.dump(2) + "\n");
}

}  // namespace dsiscan
