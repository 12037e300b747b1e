#include "lbmh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "lbmh/engine.hpp"
#include "lbmh/error.hpp"
#include "lbmh/parallel.hpp"
#include "lbmh/quadrature.hpp"

namespace lbmh {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  return os;
}

constexpr double kInvPhi = 0.6180339887498949;

}  // namespace

EsjdEstimate esjd_direct(const LBProposal& prop, const TargetModel& model, std::uint64_t seed,
                         const EsjdOptions& options) {
  if (options.n_samples < 1) throw ConfigError("esjd_direct needs n_samples >= 1");
  if (options.chunk < 1) throw ConfigError("esjd chunk size must be positive");
  if (model.kind() == TargetModel::Kind::poisson_re) {
    throw ConfigError("esjd_direct needs a target with an exact sampler");
  }
  const int n = model.dim();
  if (options.tracked >= n || options.tracked < -1) throw ConfigError("tracked coordinate out of range");

  EvaluatedPoint x, y;
  x.x.resize(n);
  double sum = 0.0, sum_sq = 0.0, sum_acc = 0.0;
  const long chunks = (options.n_samples + options.chunk - 1) / options.chunk;
  for (long c = 0; c < chunks; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    const long count = std::min(options.chunk, options.n_samples - c * options.chunk);
    for (long k = 0; k < count; ++k) {
      model.sample_into(rng, x.x);
      model.evaluate(x.x, x);
      propose_into(prop, model, x, y, rng);
      const double alpha = std::exp(std::min(0.0, log_mh_rho(prop, x, y).rho));
      const double jump = options.tracked < 0 ? (y.x - x.x).squaredNorm() / n
                                              : std::pow(y.x(options.tracked) - x.x(options.tracked), 2);
      const double v = alpha * jump;
      sum += v;
      sum_sq += v * v;
      sum_acc += alpha;
    }
  }
  const double N = static_cast<double>(options.n_samples);
  EsjdEstimate est;
  est.n_samples = options.n_samples;
  est.esjd = sum / N;
  est.acc_rate = sum_acc / N;
  if (options.n_samples > 1) {
    const double var = std::max(0.0, (sum_sq - N * est.esjd * est.esjd) / (N - 1.0));
    est.std_err = std::max(std::sqrt(var / N), std::numeric_limits<double>::min());
  }
  return est;
}

TargetFunctionals<double> design_functionals(const TargetModel& model) {
  if (const auto* f = model.factor()) {
    if (f->name == "gaussian") return {0.0, 1.0, 0.0};
    return abc_functionals(*f);
  }
  return {0.0, 1.0, 0.0};
}

double theory_sigma0(const Preset& preset, const TargetModel& model) {
  const double n = model.dim();
  // smallest conditional standard deviation of a coordinate
  double cond_sd = 1.0;
  if (const auto* cov = model.covariance()) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(model.dim());
    e(model.dim() / 2) = 1.0;
    cond_sd = 1.0 / std::sqrt(cov->apply_precision(e)(model.dim() / 2));
  }
  if (!preset.locally_balanced) {
    double info = 1.0;
    if (const auto* f = model.factor(); f && f->name != "gaussian") {
      const auto& fac = *f;
      info = integrate([&](double x) { return -fac.d2phi(x) * std::exp(fac.phi(x) - fac.log_normalizer); },
                       -kInf, kInf);
    } else if (model.covariance()) {
      info = 1.0 / (cond_sd * cond_sd);
    }
    return 2.38 / std::sqrt(n * info);
  }
  const double theta_sq = preset_theta_squared(preset, design_functionals(model));
  const auto eff = optimal_ell(theta_sq);
  if (eff.degenerate) return cond_sd;
  return *eff.ell_star * std::pow(n, -1.0 / 6.0) * cond_sd;
}

SigmaOptimum optimize_sigma(const Preset& preset, const TargetModel& model, std::uint64_t seed,
                            const SigmaSearchOptions& options) {
  if (options.iterations < 1) throw ConfigError("golden-section search needs at least one iteration");
  if (!(options.half_width > 0.0)) throw ConfigError("search half-width must be positive");
  const double centre = std::log(options.sigma0 ? *options.sigma0 : theory_sigma0(preset, model));
  if (!std::isfinite(centre)) throw ConfigError("search centre must be a positive finite sigma");

  SigmaOptimum best;
  best.estimate.esjd = -1.0;
  auto eval = [&](double log_sigma) {
    const EsjdEstimate e = esjd_direct(preset.make(std::exp(log_sigma)), model, seed, options.esjd);
    ++best.evaluations;
    if (e.esjd > best.estimate.esjd) {
      best.estimate = e;
      best.sigma_opt = std::exp(log_sigma);
    }
    return e.esjd;
  };

  double lo_c = centre - options.half_width;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double lo0 = lo_c, hi0 = lo_c + 2.0 * options.half_width;
    double a = lo0, b = hi0;
    double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < options.iterations; ++it) {
      if (f1 >= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = eval(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = eval(x2);
      }
    }
    const double edge = 0.05 * (hi0 - lo0);
    const double best_log = std::log(best.sigma_opt);
    const bool at_lo = best_log - lo0 < edge, at_hi = hi0 - best_log < edge;
    if (!at_lo && !at_hi) return best;
    if (attempt == 1) {
      throw NumericalError("ESJD maximum for " + preset.label + " at n=" + std::to_string(model.dim()) +
                           " sits on the edge of the widened search bracket");
    }
    best.widened = true;
    lo_c = (at_lo ? lo0 : hi0) - options.half_width;
  }
  return best;
}

const ScanRow& ScanResult::at(const std::string& preset, int n) const {
  for (const auto& r : rows) {
    if (r.preset == preset && r.n == n) return r;
  }
  throw ConfigError("no scan row for " + preset + " at n=" + std::to_string(n));
}

double log_log_slope(const std::vector<double>& n, const std::vector<double>& y) {
  if (n.size() != y.size() || n.size() < 2) throw ConfigError("slope fit needs two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n.size());
  my /= static_cast<double>(n.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(n[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ScanResult scan_models(const std::vector<PresetSpec>& presets, const ModelBuilder& build,
                       const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options) {
  if (n_grid.empty()) throw ConfigError("empty dimension grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1 || (i && n_grid[i] <= n_grid[i - 1])) throw ConfigError("n grid must be ascending and positive");
  }
  const std::size_t P = presets.size(), G = n_grid.size();
  std::vector<ScanRow> slots(P * G);
  parallel_for(P * G, options.threads, [&](std::size_t task) {
    const std::size_t p = task / G, g = task % G;
    const int n = n_grid[g];
    const TargetModel model = build(n);
    const Preset preset = resolve_preset(presets[p], design_functionals(model));
    const auto opt = optimize_sigma(preset, model, derive_seed(seed, hash_name(presets[p].label()), n),
                                    options.search);
    ScanRow& r = slots[task];
    r.n = n;
    r.preset = preset.label;
    r.sigma_opt = opt.sigma_opt;
    r.esjd = opt.estimate.esjd;
    r.acc = opt.estimate.acc_rate;
    r.esjd_scaled = std::cbrt(static_cast<double>(n)) * r.esjd;
    r.std_err = opt.estimate.std_err;
  });

  ScanResult out;
  out.rows = std::move(slots);
  if (G >= 2) {
    const std::size_t first = G / 2;
    for (std::size_t p = 0; p < P; ++p) {
      std::vector<double> xs, ys;
      for (std::size_t g = (G - first >= 2 ? first : 0); g < G; ++g) {
        xs.push_back(n_grid[g]);
        ys.push_back(out.rows[p * G + g].esjd);
      }
      out.slopes[out.rows[p * G].preset] = log_log_slope(xs, ys);
    }
  }
  return out;
}

ScanResult esjd_scan(const std::vector<PresetSpec>& presets, const ProductFactor& factor,
                     const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options) {
  return scan_models(presets, [&](int n) { return TargetModel::product(factor, n); }, n_grid, seed, options);
}

ScanResult correlated_scan(const std::vector<PresetSpec>& presets, CovStructure structure, double rho,
                           const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options) {
  return scan_models(
      presets, [&](int n) { return TargetModel::correlated_gaussian(CovSpec(n, structure, rho)); }, n_grid,
      derive_seed(seed, static_cast<std::uint64_t>(structure)), options);
}

std::vector<SweepRow> mu4_sweep(const ProductFactor& factor, const std::vector<double>& mu4_list,
                                const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options) {
  std::vector<PresetSpec> presets;
  for (double m : mu4_list) {
    if (!(m > 1.0)) throw ConfigError("mu4 values must exceed 1");
    presets.push_back({"three-point", {m}});
  }
  const ScanResult scan = esjd_scan(presets, factor, n_grid, seed, options);
  std::vector<SweepRow> rows;
  for (std::size_t p = 0; p < presets.size(); ++p) {
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const ScanRow& r = scan.rows[p * n_grid.size() + g];
      rows.push_back({r.n, mu4_list[p], r.esjd, r.acc, r.sigma_opt});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.n != b.n ? a.n < b.n : a.mu4 < b.mu4;
  });
  return rows;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw ConfigError("KS statistic of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double N = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, F - static_cast<double>(i) / N, static_cast<double>(i + 1) / N - F});
  }
  return std::clamp(d, 0.0, 1.0);
}

CltCheck clt_check(const PresetSpec& spec, const ProductFactor& factor, int n, double ell, long n_samples,
                   std::uint64_t seed, unsigned threads) {
  if (n < 1 || n_samples < 2 || !(ell > 0.0)) throw ConfigError("clt_check needs n >= 1, 2+ samples, ell > 0");
  const TargetModel model = TargetModel::product(factor, n);
  const auto f = design_functionals(model);
  const Preset preset = resolve_preset(spec, f);
  CltCheck c;
  c.ell = ell;
  c.n = n;
  c.n_samples = n_samples;
  c.theta_sq = preset_theta_squared(preset, f);
  if (!(c.theta_sq > 0.0)) throw NumericalError("theta^2 = 0: no non-degenerate limit for " + preset.label);
  const double v = std::pow(ell, 6) * c.theta_sq;
  c.pred_mean = -0.5 * v;
  c.pred_var = v;

  const LBProposal prop = preset.make(ell * std::pow(static_cast<double>(n), -1.0 / 6.0));
  constexpr long kChunk = 256;
  const long chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<double> rhos(static_cast<std::size_t>(n_samples));
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c_idx) {
    Rng rng(derive_seed(seed, c_idx));
    EvaluatedPoint x, y;
    x.x.resize(n);
    const long begin = static_cast<long>(c_idx) * kChunk;
    const long end = std::min(n_samples, begin + kChunk);
    for (long k = begin; k < end; ++k) {
      model.sample_into(rng, x.x);
      model.evaluate(x.x, x);
      propose_into(prop, model, x, y, rng);
      rhos[static_cast<std::size_t>(k)] = log_mh_rho(prop, x, y).rho;
    }
  });
  double mean = 0.0;
  for (double r : rhos) mean += r;
  mean /= static_cast<double>(n_samples);
  double var = 0.0;
  for (double r : rhos) var += (r - mean) * (r - mean);
  c.emp_mean = mean;
  c.emp_var = var / static_cast<double>(n_samples - 1);
  const double sd = std::sqrt(v);
  c.ks_stat = ks_statistic(rhos, [&](double r) { return standard_normal_cdf((r - c.pred_mean) / sd); });
  c.draws = std::move(rhos);
  return c;
}

double PoissonResult::median_ratio(double scenario, const std::string& numerator,
                                   const std::string& denominator) const {
  std::map<int, double> num, den;
  for (const auto& r : rows) {
    if (r.scenario != scenario) continue;
    if (r.preset == numerator) num[r.rep] = r.median_ess;
    if (r.preset == denominator) den[r.rep] = r.median_ess;
  }
  std::vector<double> ratios;
  for (const auto& [rep, v] : num) {
    if (auto it = den.find(rep); it != den.end()) ratios.push_back(v / it->second);
  }
  if (ratios.empty()) throw ConfigError("no matching repetitions for " + numerator + "/" + denominator);
  std::sort(ratios.begin(), ratios.end());
  const std::size_t m = ratios.size();
  return m % 2 ? ratios[m / 2] : 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]);
}

PoissonResult poisson_experiment(const PoissonConfig& config, std::uint64_t seed) {
  std::vector<PresetSpec> presets = config.presets;
  if (presets.empty()) presets = parse_preset_list("barker,barker-bimodal(0.1),mala,rwm");
  for (const auto& p : presets) {
    if (p.kind != "barker" && p.kind != "barker-bimodal" && p.kind != "mala" && p.kind != "rwm") {
      throw ConfigError("preset " + p.label() + " is not part of the Poisson study");
    }
  }
  if (config.reps < 1 || config.iterations < 200) throw ConfigError("Poisson study needs reps >= 1 and 200+ iterations");
  for (double s : config.scenarios) {
    if (!(s > 0.0)) throw ConfigError("sigma_eta must be positive");
  }

  const std::size_t S = config.scenarios.size(), R = static_cast<std::size_t>(config.reps), P = presets.size();
  std::vector<PoissonRow> slots(S * R * P);
  parallel_for(S * R * P, config.threads, [&](std::size_t task) {
    const std::size_t s = task / (R * P), r = (task / P) % R, p = task % P;
    const double sigma_eta = config.scenarios[s];
    const std::uint64_t data_seed = config.regenerate_data
                                        ? derive_seed(seed, hash_name("data"), s, r)
                                        : derive_seed(seed, hash_name("data"), s);
    const TargetModel model = TargetModel::poisson_re(poisson_generate(data_seed, sigma_eta));
    Rng init_rng(derive_seed(seed, hash_name("init"), s, r));
    const Eigen::VectorXd init = poisson_prior_draw(*model.poisson_data(), init_rng);

    const Preset preset = resolve_preset(presets[p]);
    const double dim = model.dim();
    const double sigma_start = preset.locally_balanced ? std::pow(dim, -1.0 / 6.0) : 2.38 / std::sqrt(dim);
    auto adapt = AdaptState::start(model.dim(), sigma_start,
                                   preset.locally_balanced ? kLocallyBalancedTargetAcc : kRwmTargetAcc);
    ChainOptions opts;
    opts.adapt_fraction = config.adapt_fraction;
    opts.burn_in_fraction = config.burn_in_fraction;

    PoissonRow& row = slots[task];
    row.scenario = sigma_eta;
    row.rep = static_cast<int>(r) + 1;
    row.preset = preset.label;
    Rng rng(derive_seed(seed, hash_name(preset.label), s, r));
    std::string problem;
    try {
      const ChainOutput out = run_chain(preset.make(sigma_start), model, config.iterations, init, rng, adapt, opts);
      if (out.diverged) {
        problem = out.diagnostic;
      } else {
        std::vector<double> e(out.ess.data(), out.ess.data() + out.ess.size());
        std::sort(e.begin(), e.end());
        const std::size_t m = e.size();
        row.median_ess = m % 2 ? e[m / 2] : 0.5 * (e[m / 2 - 1] + e[m / 2]);
        row.min_ess = e.front();
        row.acc = out.acc_rate;
      }
    } catch (const NumericalError& err) {
      problem = err.what();
    }
    if (!problem.empty()) {
      row.diverged = true;
      row.median_ess = row.min_ess = 1.0;
      std::cerr << "warning: " << preset.label << " diverged (sigma_eta=" << sigma_eta << ", rep " << row.rep
                << "): " << problem << "\n";
    }
  });
  return {std::move(slots)};
}

void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& path) {
  auto os = open_csv(path);
  os << "n,preset,sigma_opt,esjd,acc,esjd_n13\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.preset << ',' << fmt(r.sigma_opt) << ',' << fmt(r.esjd) << ',' << fmt(r.acc) << ','
       << fmt(r.esjd_scaled) << '\n';
  }
}

void write_clt_csv(const std::vector<CltCheck>& rows, const std::string& path) {
  auto os = open_csv(path);
  os << "n,ell,emp_mean,emp_var,pred_mean,pred_var,ks\n";
  for (const auto& c : rows) {
    os << c.n << ',' << fmt(c.ell) << ',' << fmt(c.emp_mean) << ',' << fmt(c.emp_var) << ',' << fmt(c.pred_mean)
       << ',' << fmt(c.pred_var) << ',' << fmt(c.ks_stat) << '\n';
  }
}

void write_poisson_result_csv(const std::vector<PoissonRow>& rows, const std::string& path) {
  auto os = open_csv(path);
  os << "scenario,rep,preset,median_ess,min_ess,acc\n";
  for (const auto& r : rows) {
    os << fmt(r.scenario) << ',' << r.rep << ',' << r.preset << ',' << fmt(r.median_ess) << ',' << fmt(r.min_ess)
       << ',' << fmt(r.acc) << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  auto os = open_csv(path);
  os << "n,mu4,esjd,acc\n";
  for (const auto& r : rows) os << r.n << ',' << fmt(r.mu4) << ',' << fmt(r.esjd) << ',' << fmt(r.acc) << '\n';
}

}  // namespace lbmh
