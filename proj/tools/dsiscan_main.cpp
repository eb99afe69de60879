// dsiscan: detect log-periodic structure in heavy-tailed size distributions.
//
// Subcommands:
//   analyze  - full pipeline over a sizes CSV (holdings/returns optional)
//   synth    - generate a synthetic sizes CSV with known ground truth
//   selftest - run the built-in acceptance suite
//
// Exit codes: 0 success, 2 input validation, 3 numeric failure,
// 4 selftest failure.

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsiscan/pipeline.hpp"
#include "dsiscan/selftest.hpp"
#include "dsiscan/types.hpp"

namespace {

using dsiscan::InputError;
using dsiscan::PipelineConfig;

nlohmann::json load_config_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cli: cannot open config file " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("cli: invalid config JSON: ") + e.what());
  }
}

// Config JSON provides the defaults; explicitly passed flags win.
void apply_config(const nlohmann::json& j, PipelineConfig& cfg) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("sizes", cfg.sizes_path);
  get("holdings", cfg.holdings_path);
  get("returns", cfg.returns_path);
  get("out", cfg.out_dir);
  get("seed", cfg.seed);
  get("surrogates", cfg.surrogates);
  get("omega_max", cfg.omega_max);
  get("omega_bins", cfg.omega_bins);
  get("grid_size", cfg.grid_size);
  get("bandwidths", cfg.bandwidths);
  get("layer_ratio", cfg.layer_ratio);
  get("layer_tolerance", cfg.layer_tolerance);
  get("periods_per_year", cfg.periods_per_year);
}

int run(int argc, char** argv) {
  CLI::App app{"Discrete-scale-invariance scanner for size distributions"};
  app.require_subcommand(1);

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline");
  PipelineConfig cfg;
  std::string config_path;
  PipelineConfig flags;  // raw flag values; copied over cfg when passed
  analyze->add_option("--config", config_path, "JSON config file");
  analyze->add_option("--sizes", flags.sizes_path, "sizes CSV (entity_id,size_usd)");
  analyze->add_option("--holdings", flags.holdings_path, "holdings CSV");
  analyze->add_option("--returns", flags.returns_path, "returns CSV");
  analyze->add_option("--out", flags.out_dir, "output directory");
  analyze->add_option("--seed", flags.seed, "RNG seed");
  analyze->add_option("--surrogates", flags.surrogates, "surrogate count (>= 100)");
  analyze->add_option("--omega-max", flags.omega_max, "upper bound of the omega grid");
  analyze->add_option("--omega-bins", flags.omega_bins, "omega grid size");
  analyze->add_option("--grid-size", flags.grid_size, "KDE grid size");
  analyze->add_option("--bandwidths", flags.bandwidths,
                      "KDE bandwidth candidates (ln-units)");
  analyze->add_option("--layer-ratio", flags.layer_ratio, "target layer size ratio");
  analyze->add_option("--periods-per-year", flags.periods_per_year,
                      "return observations per year");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate synthetic sizes");
  dsiscan::GrowthModelParams params;
  double s_min = 1e5, s_max = 1e11;
  int count = 479;
  std::uint64_t synth_seed = 42;
  std::string synth_out, synth_config;
  synth->add_option("--config", synth_config, "JSON config file");
  synth->add_option("--n", params.n, "nonextensivity parameter (> 1)");
  synth->add_option("--t0", params.T0, "temperature scale, USD");
  synth->add_option("--gamma", params.gamma, "per-step multiplicative scale");
  synth->add_option("--kappa", params.kappa, "number of time steps");
  synth->add_option("--w0", params.w0, "constant amplitude");
  synth->add_option("--w1", params.w1, "log-periodic amplitude (|w1| < w0)");
  synth->add_option("--s-min", s_min, "lower truncation, USD");
  synth->add_option("--s-max", s_max, "upper truncation, USD");
  synth->add_option("--count", count, "number of draws");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  // ---- selftest ----
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) {
    if (!config_path.empty()) apply_config(load_config_json(config_path), cfg);
    auto take = [&](const char* flag, auto member) {
      if (analyze->count(flag) > 0) cfg.*member = flags.*member;
    };
    take("--sizes", &PipelineConfig::sizes_path);
    take("--holdings", &PipelineConfig::holdings_path);
    take("--returns", &PipelineConfig::returns_path);
    take("--out", &PipelineConfig::out_dir);
    take("--seed", &PipelineConfig::seed);
    take("--surrogates", &PipelineConfig::surrogates);
    take("--omega-max", &PipelineConfig::omega_max);
    take("--omega-bins", &PipelineConfig::omega_bins);
    take("--grid-size", &PipelineConfig::grid_size);
    take("--bandwidths", &PipelineConfig::bandwidths);
    take("--layer-ratio", &PipelineConfig::layer_ratio);
    take("--periods-per-year", &PipelineConfig::periods_per_year);
    if (cfg.out_dir.empty()) {
      throw InputError("cli: --out is required for analyze");
    }
    const auto result = dsiscan::run_analyze(cfg);
    std::printf("analyze: wrote report bundle to %s\n", cfg.out_dir.c_str());
    std::printf("  density-route peak omega=%.4f p=%.4f\n",
                result.density_route.fundamental,
                result.density_route.p_value);
    std::printf("  layers=%d mean boundary ratio=%.3f\n",
                result.partition.layer_count(), result.stats.mean_ratio);
    return 0;
  }

  if (synth->parsed()) {
    if (!synth_config.empty()) {
      const auto j = load_config_json(synth_config);
      auto get = [&](const char* key, const char* flag, auto& field) {
        if (j.contains(key) && synth->count(flag) == 0) {
          field = j.at(key).get<std::decay_t<decltype(field)>>();
        }
      };
      get("n", "--n", params.n);
      get("t0", "--t0", params.T0);
      get("gamma", "--gamma", params.gamma);
      get("kappa", "--kappa", params.kappa);
      get("w0", "--w0", params.w0);
      get("w1", "--w1", params.w1);
      get("s_min", "--s-min", s_min);
      get("s_max", "--s-max", s_max);
      get("count", "--count", count);
      get("seed", "--seed", synth_seed);
    }
    dsiscan::run_synth(params, s_min, s_max, count, synth_seed, synth_out);
    std::printf("synth: wrote %d draws and ground_truth.json to %s\n", count,
                synth_out.c_str());
    return 0;
  }

  if (selftest->parsed()) {
    const auto results = dsiscan::run_acceptance();
    int failures = 0;
    for (const auto& r : results) {
      std::printf("criterion %2d [%s]: %s (%.0f ms) %s\n", r.id,
                  r.name.c_str(), r.passed ? "PASS" : "FAIL", r.millis,
                  r.detail.c_str());
      if (!r.passed) ++failures;
    }
    std::printf("%zu criteria, %d failed\n", results.size(), failures);
    return failures == 0 ? 0 : 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
}
