#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lbmh/asymptotics.hpp"
#include "lbmh/config.hpp"
#include "lbmh/engine.hpp"
#include "lbmh/error.hpp"
#include "lbmh/experiments.hpp"
#include "lbmh/presets.hpp"

namespace fs = std::filesystem;
using namespace lbmh;

namespace {

std::vector<int> default_grid() { return {32, 64, 128, 256, 512, 1024, 2048, 4096}; }

std::uint64_t need_seed(const RunConfig& cfg, const CLI::App& app) {
  if (!cfg.seed) {
    std::cerr << "error: --seed is required\n\n" << app.help();
    throw ConfigError("missing --seed");
  }
  return *cfg.seed;
}

std::string out_path(const RunConfig& cfg, const std::string& file) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / file).string();
}

ScanOptions scan_options(const RunConfig& cfg, long default_samples) {
  ScanOptions o;
  o.threads = cfg.threads;
  o.search.esjd.n_samples = cfg.samples.value_or(default_samples);
  if (cfg.golden_iterations) o.search.iterations = *cfg.golden_iterations;
  if (cfg.sigma) o.search.sigma0 = *cfg.sigma;
  return o;
}

std::string slope_summary(const ScanResult& r) {
  std::ostringstream os;
  os << std::setprecision(4);
  const char* sep = "";
  for (const auto& [preset, slope] : r.slopes) {
    os << sep << preset << " slope " << slope;
    sep = ", ";
  }
  return os.str();
}

nlohmann::json summary_json(const EfficiencySummary& e) {
  nlohmann::json j;
  j["theta_sq"] = e.theta_sq;
  j["degenerate"] = e.degenerate;
  auto put = [&](const char* key, const std::optional<double>& v) { j[key] = v ? nlohmann::json(*v) : nlohmann::json(); };
  put("ell_star", e.ell_star);
  put("h_star", e.h_star);
  put("limiting_acc", e.limiting_acc);
  put("s_star", e.s_star);
  return j;
}

int cmd_design(const RunConfig& cfg) {
  const TargetSpec target = parse_target(cfg.target.value_or("gaussian"));
  TargetFunctionals<double> f{0.0, 1.0, 0.0};
  if (target.kind == TargetSpec::Kind::hyperbolic) f = abc_functionals(target.factor());
  if (target.kind == TargetSpec::Kind::poisson) throw ConfigError("design needs a product or Gaussian target");
  const auto specs = parse_preset_list(cfg.presets.value_or("mala,barker,barker-rademacher"));

  nlohmann::json out;
  out["target"] = target.describe();
  out["functionals"] = {{"A", f.A}, {"B", f.B}, {"C", f.C}};
  out["theta_sq_lower_bound"] = theta_lower_bound(f);
  out["efficiency_constant"] = efficiency_constant();
  std::vector<std::pair<std::string, double>> thetas;
  for (const auto& spec : specs) {
    const Preset p = resolve_preset(spec, f);
    const double theta_sq = preset_theta_squared(p, f);
    auto j = summary_json(optimal_ell(theta_sq));
    j["gfrak"] = *p.g.gfrak();
    j["mu4"] = p.mu.mu4();
    j["mu6"] = p.mu.mu6();
    out["presets"][p.label] = j;
    thetas.emplace_back(p.label, theta_sq);
  }
  nlohmann::json ratios = nlohmann::json::object();
  for (const auto& [a, ta] : thetas) {
    for (const auto& [b, tb] : thetas) {
      if (a != b && ta > 0.0 && tb > 0.0) ratios[a + "/" + b] = efficiency_ratio(ta, tb);
    }
  }
  out["ratios"] = ratios;
  const std::string text = out.dump(2);
  std::ofstream(out_path(cfg, "design.json")) << text << '\n';
  std::cout << text << '\n';
  return 0;
}

int cmd_scan(const RunConfig& cfg, const CLI::App& app) {
  const std::uint64_t seed = need_seed(cfg, app);
  const TargetSpec target = parse_target(cfg.target.value_or("gaussian"));
  if (!target.is_product()) throw ConfigError("esjd-scan needs a product target (gaussian or hyperbolic)");
  const auto specs = parse_preset_list(cfg.presets.value_or("mala,barker"));
  const auto result = esjd_scan(specs, target.factor(), cfg.n_grid.value_or(default_grid()), seed,
                                scan_options(cfg, 200000));
  const std::string path = out_path(cfg, "scan.csv");
  write_scan_csv(result.rows, path);
  std::cout << "esjd-scan: " << result.rows.size() << " rows -> " << path << "; " << slope_summary(result) << '\n';
  return 0;
}

int cmd_correlated(const RunConfig& cfg, const CLI::App& app) {
  const std::uint64_t seed = need_seed(cfg, app);
  const TargetSpec target = parse_target(cfg.target.value_or("ar1:0.99"));
  if (target.kind != TargetSpec::Kind::correlated) throw ConfigError("correlated needs an ar1 or equicorrelated target");
  const auto specs = parse_preset_list(cfg.presets.value_or("mala,barker,barker-rademacher,barker-bimodal(0.1)"));
  const auto result = correlated_scan(specs, target.structure, target.rho, cfg.n_grid.value_or(default_grid()), seed,
                                      scan_options(cfg, 200000));
  const std::string path = out_path(cfg, "correlated.csv");
  write_scan_csv(result.rows, path);
  std::cout << "correlated (" << target.describe() << "): " << result.rows.size() << " rows -> " << path << '\n';
  return 0;
}

int cmd_clt(const RunConfig& cfg, const CLI::App& app) {
  const std::uint64_t seed = need_seed(cfg, app);
  const TargetSpec target = parse_target(cfg.target.value_or("gaussian"));
  if (!target.is_product()) throw ConfigError("clt-check needs a product target");
  const auto specs = parse_preset_list(cfg.presets.value_or("barker"));
  std::vector<CltCheck> rows;
  for (int n : cfg.n_grid.value_or(std::vector<int>{4096})) {
    rows.push_back(clt_check(specs.front(), target.factor(), n, cfg.ell.value_or(1.0), cfg.samples.value_or(20000),
                             derive_seed(seed, static_cast<std::uint64_t>(n)), cfg.threads));
  }
  const std::string path = out_path(cfg, "clt.csv");
  write_clt_csv(rows, path);
  const auto& c = rows.back();
  std::cout << "clt-check: n=" << c.n << " emp_var/pred_var=" << c.emp_var / c.pred_var
            << " emp_mean/emp_var=" << c.emp_mean / c.emp_var << " ks=" << c.ks_stat << " -> " << path << '\n';
  return 0;
}

int cmd_poisson(const RunConfig& cfg, const CLI::App& app) {
  const std::uint64_t seed = need_seed(cfg, app);
  PoissonConfig pc;
  if (cfg.scenarios) {
    pc.scenarios = *cfg.scenarios;
  } else if (cfg.target) {
    const TargetSpec t = parse_target(*cfg.target);
    if (t.kind != TargetSpec::Kind::poisson) throw ConfigError("poisson needs a poisson:<sigma_eta> target");
    pc.scenarios = {t.sigma_eta};
  }
  pc.reps = cfg.reps.value_or(cfg.full ? 100 : 20);
  pc.iterations = cfg.iterations.value_or(cfg.full ? 50000 : 20000);
  if (cfg.presets) pc.presets = parse_preset_list(*cfg.presets);
  pc.regenerate_data = !cfg.fixed_data;
  pc.threads = cfg.threads;
  if (cfg.poisson_data_csv) {
    for (std::size_t s = 0; s < pc.scenarios.size(); ++s) {
      const auto data = poisson_generate(derive_seed(seed, hash_name("data"), s, 0), pc.scenarios[s]);
      std::ostringstream name;
      name << "poisson_data_" << s + 1 << ".csv";
      write_poisson_csv(data, out_path(cfg, name.str()));
    }
  }
  const auto result = poisson_experiment(pc, seed);
  const std::string path = out_path(cfg, "poisson.csv");
  write_poisson_result_csv(result.rows, path);
  std::cout << "poisson: " << result.rows.size() << " rows -> " << path;
  bool has_bimodal = false, has_barker = false;
  for (const auto& r : result.rows) {
    has_bimodal = has_bimodal || r.preset == "barker-bimodal(0.1)";
    has_barker = has_barker || r.preset == "barker";
  }
  if (has_bimodal && has_barker) {
    for (double s : pc.scenarios) {
      std::cout << "; sigma_eta=" << s << " bimodal/gaussian median ESS ratio "
                << result.median_ratio(s, "barker-bimodal(0.1)", "barker");
    }
  }
  std::cout << '\n';
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const CLI::App& app) {
  const std::uint64_t seed = need_seed(cfg, app);
  const TargetSpec target = parse_target(cfg.target.value_or("gaussian"));
  if (!target.is_product()) throw ConfigError("mu4-sweep needs a product target");
  const auto mu4 = cfg.mu4.value_or(std::vector<double>{1.1, 1.5, 2.0, 3.0});
  const auto rows = mu4_sweep(target.factor(), mu4, cfg.n_grid.value_or(std::vector<int>{10, 100, 1000, 4096}), seed,
                              scan_options(cfg, 200000));
  const std::string path = out_path(cfg, "sweep.csv");
  write_sweep_csv(rows, path);
  std::cout << "mu4-sweep: " << rows.size() << " rows -> " << path << '\n';
  return 0;
}

int cmd_chain(const RunConfig& cfg, const CLI::App& app, bool adapt) {
  const std::uint64_t seed = need_seed(cfg, app);
  const TargetSpec target = parse_target(cfg.target.value_or("gaussian"));
  const int n = cfg.n_grid ? cfg.n_grid->front() : 10;
  const TargetModel model = target.build(n, derive_seed(seed, hash_name("data")));
  const auto specs = parse_preset_list(cfg.presets.value_or("barker"));
  const Preset preset = resolve_preset(specs.front(), target.kind == TargetSpec::Kind::poisson
                                                          ? std::nullopt
                                                          : std::optional(design_functionals(model)));
  Rng init_rng(derive_seed(seed, hash_name("init")));
  const Eigen::VectorXd init = target.kind == TargetSpec::Kind::poisson
                                   ? poisson_prior_draw(*model.poisson_data(), init_rng)
                                   : model.sample(init_rng);
  double sigma = 0.0;
  if (cfg.sigma) {
    sigma = *cfg.sigma;
  } else if (target.kind == TargetSpec::Kind::poisson) {
    sigma = preset.locally_balanced ? std::pow(model.dim(), -1.0 / 6.0) : 2.38 / std::sqrt(model.dim());
  } else {
    sigma = theory_sigma0(preset, model);
  }
  std::optional<AdaptState> state;
  if (adapt) {
    state = AdaptState::start(model.dim(), sigma,
                              preset.locally_balanced ? kLocallyBalancedTargetAcc : kRwmTargetAcc);
  }
  ChainOptions opts;
  for (int i = 0; i < std::min(model.dim(), 5); ++i) opts.csv_coords.push_back(i);
  opts.record_coords = opts.csv_coords;
  opts.adapt_fraction = 0.5;
  opts.burn_in_fraction = adapt ? 0.5 : 0.0;
  const std::string path = out_path(cfg, "chain.csv");
  std::ofstream csv(path, std::ios::binary);
  if (!csv) throw ConfigError("cannot open '" + path + "'");
  csv << std::setprecision(10);
  opts.csv = &csv;
  opts.compute_ess = cfg.iterations.value_or(10000) * (1.0 - opts.burn_in_fraction) >= 100;
  Rng rng(derive_seed(seed, hash_name(preset.label)));
  const ChainOutput out = run_chain(preset.make(sigma), model, cfg.iterations.value_or(10000), init, rng, state, opts);
  if (out.diverged) throw NumericalError(out.diagnostic);
  std::cout << "chain: " << preset.label << " on " << target.describe() << " acc=" << out.acc_rate;
  if (out.ess.size()) std::cout << " ess[0]=" << out.ess(0);
  std::cout << " -> " << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally-balanced Metropolis-Hastings samplers and scaling experiments"};
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cli;
  std::string config_path, target, presets, n_grid, mu4, scenarios;
  std::uint64_t seed = 0;
  long samples = 0, iterations = 0;
  int reps = 0, golden = 0;
  double ell = 0, sigma = 0;
  unsigned threads = 1;
  std::string out_dir;
  bool full = false, fixed_data = false, adapt = false, data_csv = false;

  auto* o_target = app.add_option("--target", target, "gaussian | hyperbolic[:d2] | ar1[:rho] | equicorrelated[:rho] | poisson[:sigma_eta]");
  auto* o_presets = app.add_option("--presets", presets, "comma-separated presets, e.g. mala,barker,barker-bimodal(0.1)");
  auto* o_grid = app.add_option("--n-grid", n_grid, "comma-separated ascending dimensions");
  auto* o_seed = app.add_option("--seed", seed, "64-bit master seed");
  auto* o_samples = app.add_option("--samples", samples, "Monte Carlo samples per point")->check(CLI::PositiveNumber);
  auto* o_threads = app.add_option("--threads", threads, "worker threads (0 = all cores)");
  auto* o_out = app.add_option("--out", out_dir, "output directory (LBMH_OUT overrides)");
  app.add_option("--config", config_path, "JSON config; flags override its values");
  auto* o_full = app.add_flag("--full", full, "full-scale Poisson study (100 repetitions, 5e4 iterations)");
  auto* o_ell = app.add_option("--ell", ell, "scaled step size l (clt-check)");
  auto* o_sigma = app.add_option("--sigma", sigma, "step size (chain) or search centre (scans)");
  auto* o_iters = app.add_option("--iterations", iterations, "chain iterations");
  auto* o_reps = app.add_option("--reps", reps, "Poisson repetitions");
  auto* o_mu4 = app.add_option("--mu4", mu4, "comma-separated mu4 values (mu4-sweep)");
  auto* o_golden = app.add_option("--golden-iterations", golden, "golden-section iterations");
  auto* o_scen = app.add_option("--scenarios", scenarios, "comma-separated sigma_eta values (poisson)");
  auto* o_fixed = app.add_flag("--fixed-data", fixed_data, "one Poisson dataset per scenario");
  auto* o_data = app.add_flag("--poisson-data-csv", data_csv, "also write the generated Poisson data");
  app.add_flag("--adapt", adapt, "adaptive tuning (chain)");

  auto* design = app.add_subcommand("design", "theta^2, optimal step size and predicted efficiency ratios (JSON)");
  auto* scan = app.add_subcommand("esjd-scan", "optimal ESJD against dimension on a product target");
  auto* clt = app.add_subcommand("clt-check", "distribution of the summed log-MH ratio against its normal limit");
  auto* poisson = app.add_subcommand("poisson", "ESS study on the Poisson random-effects posterior");
  auto* correlated = app.add_subcommand("correlated", "optimal ESJD on correlated Gaussian targets");
  auto* sweep = app.add_subcommand("mu4-sweep", "three-point noise across mu4 values");
  auto* chain = app.add_subcommand("chain", "run one Markov chain and write its trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_json_file(cfg, config_path);
    if (o_target->count()) cfg.target = target;
    if (o_presets->count()) cfg.presets = presets;
    if (o_grid->count()) cfg.n_grid = parse_int_list(n_grid);
    if (o_seed->count()) cfg.seed = seed;
    if (o_samples->count()) cfg.samples = samples;
    if (o_threads->count()) cfg.threads = threads;
    if (o_out->count()) cfg.out = out_dir;
    if (o_full->count()) cfg.full = full;
    if (o_ell->count()) cfg.ell = ell;
    if (o_sigma->count()) cfg.sigma = sigma;
    if (o_iters->count()) cfg.iterations = iterations;
    if (o_reps->count()) cfg.reps = reps;
    if (o_mu4->count()) cfg.mu4 = parse_double_list(mu4);
    if (o_golden->count()) cfg.golden_iterations = golden;
    if (o_scen->count()) cfg.scenarios = parse_double_list(scenarios);
    if (o_fixed->count()) cfg.fixed_data = fixed_data;
    if (o_data->count()) cfg.poisson_data_csv = data_csv;
    if (const char* env = std::getenv("LBMH_OUT"); env && *env) cfg.out = env;

    if (design->parsed()) return cmd_design(cfg);
    if (scan->parsed()) return cmd_scan(cfg, app);
    if (clt->parsed()) return cmd_clt(cfg, app);
    if (poisson->parsed()) return cmd_poisson(cfg, app);
    if (correlated->parsed()) return cmd_correlated(cfg, app);
    if (sweep->parsed()) return cmd_sweep(cfg, app);
    if (chain->parsed()) return cmd_chain(cfg, app, adapt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
