// Acceptance suite: one PASS/FAIL line per criterion, followed by indented
// detail lines. Exit status is 0 when every selected criterion passes apart
// from those listed with --known-failures.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lbmh/asymptotics.hpp"
#include "lbmh/balancing.hpp"
#include "lbmh/engine.hpp"
#include "lbmh/experiments.hpp"
#include "lbmh/presets.hpp"
#include "law_oracles.hpp"
#include "oracles.hpp"

using namespace lbmh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { details.push_back("info " + what); }
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string range(double lo, double hi) { return "[" + fmt(lo) + ", " + fmt(hi) + "]"; }

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct Settings {
  std::uint64_t seed = 20240601;
  long scan_samples = 8000;
  int golden_iterations = 13;
  double half_width = 1.5;
  long ratio_samples = 8000;
  unsigned threads = 1;
  std::string cli;
  std::string work = "acceptance_work";
};

// ---------------------------------------------------------------- constants

Outcome criterion1(const Settings&) {
  Outcome o;
  const TargetFunctionals<double> gauss{0.0, 1.0, 0.0};
  const double lang = theta_squared(gauss, 3.0, 15.0, -0.25);
  const double bark = theta_squared(gauss, 3.0, 15.0, -0.5);
  o.require(std::abs(lang - 1.0 / 16) <= 1e-12, "Langevin theta^2 = " + fmt(lang, 17) + " (1/16)");
  o.require(std::abs(bark - 15.0 / 16) <= 1e-12, "Barker theta^2 = " + fmt(bark, 17) + " (15/16)");
  return o;
}

Outcome criterion2(const Settings&) {
  Outcome o;
  for (double theta : {0.1, 1.0, 10.0}) {
    const auto e = optimal_ell(theta * theta);
    if (e.degenerate) {
      o.require(false, "theta=" + fmt(theta) + " reported degenerate");
      continue;
    }
    const double ch = *e.h_star * std::cbrt(theta * theta);
    o.require(std::abs(*e.limiting_acc - 0.574) <= 5e-4,
              "theta=" + fmt(theta) + " limiting acceptance " + fmt(*e.limiting_acc, 8) + " (0.574 +- 5e-4)");
    o.require(std::abs(ch - 0.651637) <= 1e-5,
              "theta=" + fmt(theta) + " h* theta^(2/3) = " + fmt(ch, 8) + " (0.651637 +- 1e-5)");
  }
  const double s = stationarity_root();
  o.note("s* = " + fmt(s, 10) + ", max over l of 2 l^2 Phi(-l^3/2) = " + fmt(h_of_ell(std::cbrt(2 * s), 1.0), 10));
  return o;
}

Outcome criterion3(const Settings& set) {
  Outcome o;
  Rng rng(derive_seed(set.seed, 3));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    TargetFunctionals<double> f;
    f.B = 0.05 + 5.0 * rng.uniform();
    f.C = 10.0 * (2.0 * rng.uniform() - 1.0);
    f.A = f.C * f.C / f.B + 10.0 * rng.uniform();
    const double got = optimal_gfrak_fixed_mu(f, 3.0, 15.0);
    const double want = f.C / (10.0 * f.B) - 0.2;
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  o.require(worst <= 1e-12, "max deviation from C/(10B) - 1/5 over 100 functionals: " + fmt(worst, 3));
  bool threw = false;
  try {
    optimal_gfrak_fixed_mu(TargetFunctionals<double>{1.0, 1.0, 0.5}, 1.0, 1.0);
  } catch (const ConfigError&) {
    threw = true;
  }
  o.require(threw, "Rademacher moments (1, 1) rejected");
  return o;
}

Outcome criterion4(const Settings&) {
  Outcome o;
  const auto f = abc_functionals(make_hyperbolic_factor(0.1));
  o.require(std::abs(f.A - 12.99) <= 0.01, "A = " + fmt(f.A, 8) + " (12.99 +- 0.01)");
  o.require(std::abs(f.B - 0.22) <= 0.01, "B = " + fmt(f.B, 8) + " (0.22 +- 0.01)");
  o.require(std::abs(f.C - 1.68) <= 0.01, "C = " + fmt(f.C, 8) + " (1.68 +- 0.01)");
  return o;
}

Outcome criterion5(const Settings& set) {
  Outcome o;
  Rng rng(derive_seed(set.seed, 5));
  const auto h = abc_functionals(make_hyperbolic_factor(0.1));
  const double lb = theta_lower_bound(h);
  double worst_identity = 0.0, worst_bound = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double mu4 = 1.0 + 5.0 * rng.uniform();
    const double mu6 = mu4 * mu4 * (1.0 + 4.0 * rng.uniform());
    const double gfrak = -1.0 + 3.0 * rng.uniform();
    TargetFunctionals<double> f;
    f.B = 0.05 + 5.0 * rng.uniform();
    f.C = 10.0 * (2.0 * rng.uniform() - 1.0);
    f.A = f.C * f.C / f.B + 10.0 * rng.uniform();
    const double reduced = mu6 * (f.A + 6.0 * f.C + 9.0 * f.B) / 144.0;
    worst_identity = std::max(worst_identity, std::abs(theta_squared(f, mu4, mu6, -0.5) - reduced) /
                                                  std::max(1.0, std::abs(reduced)));
    worst_bound = std::max(worst_bound, lb - theta_squared(h, mu4, mu6, gfrak));
  }
  o.require(worst_identity <= 1e-12, "Barker reduction identity, max relative error " + fmt(worst_identity, 3));
  o.require(worst_bound <= 1e-12, "lower bound " + fmt(lb, 8) + " dominated, max violation " + fmt(worst_bound, 3));
  return o;
}

// --------------------------------------------------------------- properties

Outcome criterion6(const Settings& set) {
  Outcome o;
  const auto hyper = make_hyperbolic_factor(0.1);
  const auto fh = abc_functionals(hyper);
  const std::vector<std::string> names = {"mala",          "barker",           "barker-rademacher",
                                          "barker-bimodal(0.1)", "three-point(2)", "three-point(1.5;0.8)",
                                          "gamma-gaussian(0.7)", "rwm"};
  double worst = 0.0;
  long pairs = 0;
  for (int dim : {1, 5, 51}) {
    for (const ProductFactor& factor : {make_gaussian_factor(), hyper}) {
      const auto model = TargetModel::product(factor, dim);
      for (const auto& name : names) {
        const auto preset = resolve_preset(parse_preset(name), fh);
        Rng rng(derive_seed(set.seed, 6, hash_name(name), dim));
        for (int rep = 0; rep < 100; ++rep) {
          const auto prop = preset.make(0.2 + 1.3 * rng.uniform());
          const auto x = model.evaluate(model.sample(rng));
          const auto y = propose(prop, model, x, rng).y;
          const double a = log_mh_rho(prop, x, y).rho, b = log_mh_rho(prop, y, x).rho;
          worst = std::max(worst, std::abs(a + b));
          ++pairs;
        }
      }
    }
  }
  o.require(worst <= 1e-12, "max |rho(x,y) + rho(y,x)| over " + std::to_string(pairs) + " pairs: " + fmt(worst, 3));
  return o;
}

Outcome criterion7(const Settings& set) {
  Outcome o;
  const int n = 100000;
  const double s = 0.8;
  std::uint64_t seed = derive_seed(set.seed, 7);
  auto label = [](const LBProposal& p) {
    return to_string(p.path()) + " " + p.balancing().name() + "/" + p.noise().name();
  };
  const std::vector<LBProposal> continuous = {
      LBProposal(BalancingFunction::barker(), make_gaussian_noise(), s),
      LBProposal(BalancingFunction::barker(), make_bimodal(0.1), s),
      LBProposal(BalancingFunction::sqrt(), make_gaussian_noise(), s),
      LBProposal(BalancingFunction::g_gamma(0.3), make_gaussian_noise(), s),
      LBProposal(BalancingFunction::g_gamma(1.2), make_gaussian_noise(), s),
      LBProposal(BalancingFunction::sqrt(), make_gaussian_noise(), s, ProposalPath::rwm)};
  for (const auto& p : continuous) {
    double worst = 0.0;
    for (double beta : {-2.0, 0.0, 1.0, 2.0}) worst = std::max(worst, oracle::increment_ks(p, beta, s, n, ++seed));
    o.require(worst < 0.01, label(p) + " max KS " + fmt(worst, 4));
  }
  const std::vector<LBProposal> discrete = {
      LBProposal(BalancingFunction::barker(), make_rademacher(), s),
      LBProposal(BalancingFunction::barker(), make_rademacher(), s, ProposalPath::discrete_atoms),
      LBProposal(BalancingFunction::g_gamma(0.5), make_three_point(2.0), s),
      LBProposal(BalancingFunction::sqrt(), make_three_point(4.0), s),
      LBProposal(BalancingFunction::min(), make_three_point(2.0), s),
      LBProposal(BalancingFunction::max(), make_rademacher(), s)};
  for (const auto& p : discrete) {
    double worst = 0.0;
    for (double beta : {-2.0, 0.0, 1.0, 2.0}) worst = std::max(worst, oracle::increment_tv(p, beta, s, n, ++seed));
    o.require(worst < 0.005, label(p) + " max TV " + fmt(worst, 4));
  }
  return o;
}

Outcome criterion8(const Settings& set) {
  Outcome o;
  std::vector<std::pair<std::string, BalancingFunction>> kinds = {
      {"sqrt", BalancingFunction::sqrt()},          {"barker", BalancingFunction::barker()},
      {"min", BalancingFunction::min()},            {"max", BalancingFunction::max()},
      {"g_gamma(0)", BalancingFunction::g_gamma(0.0)}, {"g_gamma(0.3)", BalancingFunction::g_gamma(0.3)},
      {"g_gamma(1.7)", BalancingFunction::g_gamma(1.7)}};
  Rng rng(derive_seed(set.seed, 8));
  for (int rep = 0; rep < 100; ++rep) {
    double c[4];
    for (double& ci : c) ci = 0.05 + rng.uniform();
    const double a = 0.02 * rng.uniform();
    kinds.emplace_back("random-even", from_even_function([=](double x) {
                         const double x2 = x * x;
                         return (c[0] + c[1] * x2 + c[2] * x2 * x2 + c[3] * x2 * x2 * x2) * std::exp(-a * x2);
                       }));
  }
  double worst_b = 0.0, worst_g = 0.0, worst_trip = 0.0;
  std::string worst_trip_kind;
  for (const auto& [name, g] : kinds) {
    for (double x = -30.0; x <= 30.0; x += 0.05) worst_b = std::max(worst_b, std::abs(g.b(x) - x - g.b(-x)));
    const auto back = from_even_function(to_even_function(g));
    for (int k = -50; k <= 50; ++k) {
      const double t = std::exp(0.1 * k);
      worst_g = std::max(worst_g, std::abs(g.g(t) - t * g.g(1.0 / t)) / g.g(t));
      const double trip = std::abs(back.g(t) - g.g(t)) / g.g(t);
      if (trip > worst_trip) worst_trip = trip, worst_trip_kind = name;
    }
  }
  o.require(worst_b <= 1e-12, "b(x) - x - b(-x) max " + fmt(worst_b, 3) + " over " + std::to_string(kinds.size()) +
                                  " balancing functions");
  o.require(worst_g <= 1e-12, "g(t) = t g(1/t) max relative error " + fmt(worst_g, 3));
  o.require(worst_trip <= 1e-12,
            "even-function round trip max relative error " + fmt(worst_trip, 3) +
                (worst_trip_kind.empty() ? "" : " (" + worst_trip_kind + ")"));
  return o;
}

Outcome criterion9(const Settings& set) {
  Outcome o;
  const auto model = TargetModel::product(make_gaussian_factor(), 1);
  for (const char* name : {"mala", "barker", "barker-bimodal(0.1)", "gamma-gaussian(0.5)", "rwm"}) {
    const auto prop = resolve_preset(parse_preset(name)).make(1.5);
    Rng rng(derive_seed(set.seed, 9, hash_name(name)));
    ChainOptions opts;
    opts.compute_ess = false;
    const auto out = run_chain(prop, model, 1000000, Eigen::VectorXd::Constant(1, 0.3), rng, {}, opts);
    std::vector<double> xs(out.samples.data(), out.samples.data() + out.samples.rows());
    const double ks = ks_statistic(xs, oracle::normal_cdf);
    o.require(ks < 0.01, std::string(name) + " KS " + fmt(ks, 4) + ", acceptance " + fmt(out.acc_rate, 3));
  }
  return o;
}

// ------------------------------------------------------------------ scaling

class ScalingData {
 public:
  explicit ScalingData(const Settings& s) : set_(s) {}

  const ScanResult& gaussian() {
    if (!gauss_) {
      ScanOptions opts = options(set_.scan_samples);
      gauss_ = esjd_scan(parse_preset_list(kPresets), make_gaussian_factor(), kGrid, set_.seed, opts);
    }
    return *gauss_;
  }
  const ScanResult& hyperbolic() {
    if (!hyper_) {
      hyper_ = esjd_scan(parse_preset_list("mala,barker-rademacher"), make_hyperbolic_factor(0.1), {1024},
                         set_.seed, options(set_.ratio_samples));
    }
    return *hyper_;
  }
  ScanOptions options(long samples) const {
    ScanOptions opts;
    opts.threads = set_.threads;
    opts.search.iterations = set_.golden_iterations;
    opts.search.half_width = set_.half_width;
    opts.search.esjd.n_samples = samples;
    return opts;
  }

  static constexpr const char* kPresets = "mala,barker,barker-rademacher,barker-bimodal(0.1),three-point(2)";
  inline static const std::vector<int> kGrid = {32, 64, 128, 256, 512, 1024, 2048, 4096};

 private:
  Settings set_;
  std::optional<ScanResult> gauss_, hyper_;
};

void add_scan_notes(Outcome& o, const ScanResult& r) {
  for (const auto& row : r.rows) {
    o.note("n=" + std::to_string(row.n) + " " + row.preset + " sigma=" + fmt(row.sigma_opt, 4) + " esjd=" +
           fmt(row.esjd, 5) + " (se " + fmt(row.std_err, 2) + ") acc=" + fmt(row.acc, 3));
  }
}

Outcome criterion10(ScalingData& data) {
  Outcome o;
  const auto& r = data.gaussian();
  for (const char* p : {"mala", "barker"}) {
    const double slope = r.slopes.at(p);
    o.require(std::abs(slope + 1.0 / 3.0) <= 0.07, std::string(p) + " slope " + fmt(slope, 4) + " (-1/3 +- 0.07)");
  }
  const auto& three = resolve_preset(parse_preset("three-point(2)"), TargetFunctionals<double>{0.0, 1.0, 0.0}).label;
  const double slope = r.slopes.at(three);
  o.require(slope > -0.28, three + " slope " + fmt(slope, 4) + " (> -0.28)");
  for (const auto& [p, s] : r.slopes) o.note(p + " slope " + fmt(s, 4));
  return o;
}

Outcome criterion11(ScalingData& data) {
  Outcome o;
  const auto& g = data.gaussian();
  const auto& h = data.hyperbolic();
  auto ratio = [](const ScanResult& r, const std::string& a, const std::string& b) {
    return r.at(a, 1024).esjd / r.at(b, 1024).esjd;
  };
  const double mb = ratio(g, "mala", "barker");
  const double rm = ratio(g, "barker-rademacher", "mala");
  const double rh = ratio(h, "barker-rademacher", "mala");
  const double bb = ratio(g, "barker-bimodal(0.1)", "barker");
  o.require(within(mb, 2.0, 3.0), "gaussian mala/barker " + fmt(mb, 4) + " in " + range(2.0, 3.0));
  o.require(within(rm, 0.85, 1.15), "gaussian barker-rademacher/mala " + fmt(rm, 4) + " in " + range(0.85, 1.15));
  o.require(within(rh, 1.6, 2.6), "hyperbolic barker-rademacher/mala " + fmt(rh, 4) + " in " + range(1.6, 2.6));
  o.require(within(bb, 2.0, 2.8), "gaussian barker-bimodal(0.1)/barker " + fmt(bb, 4) + " in " + range(2.0, 2.8));
  add_scan_notes(o, h);
  return o;
}

// The 0.574 limit exists only for theta^2 > 0; degenerate designs are reported, not judged.
Outcome criterion12(ScalingData& data) {
  Outcome o;
  const auto& g = data.gaussian();
  const TargetFunctionals<double> gauss{0.0, 1.0, 0.0};
  std::set<std::string> degenerate;
  for (const auto& spec : parse_preset_list(ScalingData::kPresets)) {
    const auto preset = resolve_preset(spec, gauss);
    if (preset.locally_balanced && preset_theta_squared(preset, gauss) <= 0.0) degenerate.insert(preset.label);
  }
  for (const auto& label : degenerate) {
    o.note(label + " has theta^2 = 0 on this target (no limiting acceptance); rows listed below, not judged");
  }
  for (const auto& row : g.rows) {
    if (row.n < 200 || degenerate.count(row.preset)) continue;
    o.require(within(row.acc, 0.5, 0.65),
              "n=" + std::to_string(row.n) + " " + row.preset + " acceptance " + fmt(row.acc, 4));
  }
  add_scan_notes(o, g);
  return o;
}

// ---------------------------------------------------------- experiment runs

Outcome criterion13(const Settings& set) {
  Outcome o;
  const auto c = clt_check(parse_preset("barker"), make_gaussian_factor(), 4096, 1.0, 20000, set.seed, set.threads);
  const double vr = c.emp_var / c.pred_var;
  const double mv = c.emp_mean / c.emp_var;
  o.require(within(vr, 0.9, 1.1), "emp_var/pred_var " + fmt(vr, 4) + " in " + range(0.9, 1.1));
  o.require(within(mv, -0.55, -0.45), "emp_mean/emp_var " + fmt(mv, 4) + " in " + range(-0.55, -0.45));
  o.require(c.ks_stat < 0.05, "KS " + fmt(c.ks_stat, 4) + " (< 0.05)");
  o.note("emp_mean " + fmt(c.emp_mean) + ", emp_var " + fmt(c.emp_var) + ", predicted N(" + fmt(c.pred_mean) + ", " +
         fmt(c.pred_var) + ")");
  const auto [qm, qv] = oracle::barker_gaussian_rho_moments(4096, 1.0);
  o.note("exact moments at n=4096 by quadrature: mean " + fmt(qm) + ", var " + fmt(qv) + " (var ratio " +
         fmt(qv / c.pred_var, 4) + ")");
  const double ks_exact = ks_statistic(c.draws, [&, qm = qm, qv = qv](double x) {
    return oracle::normal_cdf((x - qm) / std::sqrt(qv));
  });
  o.note("KS against N(exact mean, exact var): " + fmt(ks_exact, 4));
  return o;
}

Outcome criterion14(const Settings& set) {
  Outcome o;
  PoissonConfig cfg;
  cfg.reps = 20;
  cfg.iterations = 20000;
  cfg.presets = parse_preset_list("barker,barker-bimodal(0.1)");
  cfg.threads = set.threads;
  const auto res = poisson_experiment(cfg, set.seed);
  for (double s : cfg.scenarios) {
    const double r = res.median_ratio(s, "barker-bimodal(0.1)", "barker");
    o.require(within(r, 1.6, 2.6), "sigma_eta=" + fmt(s) + " bimodal/gaussian median-ESS ratio " + fmt(r, 4) +
                                       " in " + range(1.6, 2.6));
  }
  const long diverged = std::count_if(res.rows.begin(), res.rows.end(), [](const auto& r) { return r.diverged; });
  o.note(std::to_string(diverged) + " diverged runs out of " + std::to_string(res.rows.size()));
  return o;
}

Outcome criterion15(ScalingData& data, const Settings& set) {
  Outcome o;
  const auto presets = parse_preset_list("mala,barker,barker-rademacher,barker-bimodal(0.1)");
  const auto opts = data.options(set.scan_samples);
  const auto product = esjd_scan(presets, make_gaussian_factor(), {1024}, set.seed, opts);
  for (auto structure : {CovStructure::ar1, CovStructure::equicorrelated}) {
    const std::string sname = structure == CovStructure::ar1 ? "ar1" : "equicorrelated";
    const auto r = correlated_scan(presets, structure, 0.99, {1024}, set.seed, opts);
    const double mb = r.at("mala", 1024).esjd / r.at("barker", 1024).esjd;
    o.require(within(mb, 1.8, 2.8), sname + " mala/barker " + fmt(mb, 4) + " in " + range(1.8, 2.8));
    for (const auto& row : r.rows) {
      const double prod = product.at(row.preset, 1024).esjd;
      o.require(row.esjd < prod, sname + " " + row.preset + " esjd " + fmt(row.esjd, 4) + " < product " +
                                     fmt(prod, 4) + " (acc " + fmt(row.acc, 3) + ")");
    }
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome criterion16(const Settings& set) {
  Outcome o;
  if (set.cli.empty()) {
    o.require(false, "no --cli executable given");
    return o;
  }
  struct Run {
    std::string args;
    std::string file;
  };
  const std::vector<Run> runs = {
      {"esjd-scan --target gaussian --presets 'mala,barker,three-point(2)' --n-grid 8,16,32 --samples 400 "
       "--golden-iterations 6",
       "scan.csv"},
      {"esjd-scan --target hyperbolic --presets barker-rademacher --n-grid 8,16 --samples 400 --golden-iterations 6",
       "scan.csv"},
      {"clt-check --presets 'barker-bimodal(0.1)' --n-grid 64 --samples 3000", "clt.csv"},
      {"poisson --reps 2 --iterations 1500 --presets barker,rwm", "poisson.csv"},
      {"correlated --target equicorrelated:0.9 --presets mala,barker --n-grid 16,32 --samples 400 "
       "--golden-iterations 6",
       "correlated.csv"},
      {"mu4-sweep --mu4 1.1,2 --n-grid 8,16 --samples 400 --golden-iterations 6", "sweep.csv"},
      {"chain --target hyperbolic --presets barker --n-grid 5 --iterations 2000 --adapt", "chain.csv"},
  };
  const fs::path root = fs::absolute(set.work) / "determinism";
  int idx = 0;
  for (const auto& run : runs) {
    std::vector<std::string> outputs;
    bool ran = true;
    for (const char* variant : {"t1a", "t1b", "t2", "t3"}) {
      const std::string threads = variant[1] == '1' ? "1" : std::string(1, variant[1]);
      const fs::path dir = root / (std::to_string(idx) + "_" + variant);
      fs::remove_all(dir);
      const std::string cmd = "\"" + set.cli + "\" " + run.args + " --seed " + std::to_string(set.seed) +
                              " --threads " + threads + " --out \"" + dir.string() + "\" > /dev/null";
      if (std::system(cmd.c_str()) != 0 || !fs::exists(dir / run.file)) {
        ran = false;
        o.require(false, "command failed: " + cmd);
        break;
      }
      outputs.push_back(slurp(dir / run.file));
    }
    if (ran) {
      const bool same = std::all_of(outputs.begin(), outputs.end(), [&](const auto& s) { return s == outputs[0]; });
      o.require(same && !outputs[0].empty(), run.file + " byte-identical across reruns and threads {1,2,3}: " +
                                                 run.args.substr(0, run.args.find(' ')));
    }
    ++idx;
  }
  return o;
}

std::set<int> parse_selection(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-');
    const int lo = std::stoi(part.substr(0, dash));
    const int hi = dash == std::string::npos ? lo : std::stoi(part.substr(dash + 1));
    for (int c = lo; c <= hi; ++c) out.insert(c);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  Settings set;
  std::string criteria = "1-16", known;
  app.add_option("--criteria", criteria, "criteria to run, e.g. 1-5,9");
  app.add_option("--known-failures", known, "criteria allowed to fail");
  app.add_option("--seed", set.seed);
  app.add_option("--threads", set.threads);
  app.add_option("--scan-samples", set.scan_samples, "ESJD samples per sigma in scans");
  app.add_option("--ratio-samples", set.ratio_samples, "ESJD samples per sigma for the hyperbolic ratio");
  app.add_option("--golden-iterations", set.golden_iterations);
  app.add_option("--half-width", set.half_width, "golden-section bracket half width in log sigma");
  app.add_option("--cli", set.cli, "path to the lbmh executable");
  app.add_option("--work", set.work, "scratch directory");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected, allowed;
  try {
    selected = parse_selection(criteria);
    allowed = parse_selection(known);
  } catch (const std::exception&) {
    std::cerr << "bad criterion list\n";
    return 2;
  }

  ScalingData scaling(set);
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> table = {
      {1, {"theta^2 closed forms", [&] { return criterion1(set); }}},
      {2, {"optimal step constants", [&] { return criterion2(set); }}},
      {3, {"optimal curvature, Gaussian noise", [&] { return criterion3(set); }}},
      {4, {"hyperbolic functionals", [&] { return criterion4(set); }}},
      {5, {"reduction identity and lower bound", [&] { return criterion5(set); }}},
      {6, {"log-MH ratio antisymmetry", [&] { return criterion6(set); }}},
      {7, {"proposal laws", [&] { return criterion7(set); }}},
      {8, {"balancing identities", [&] { return criterion8(set); }}},
      {9, {"1-d invariant distribution", [&] { return criterion9(set); }}},
      {10, {"ESJD slopes", [&] { return criterion10(scaling); }}},
      {11, {"ESJD ratios at n=1024", [&] { return criterion11(scaling); }}},
      {12, {"acceptance at optimised sigma", [&] { return criterion12(scaling); }}},
      {13, {"log-MH ratio CLT", [&] { return criterion13(set); }}},
      {14, {"Poisson ESS ratios", [&] { return criterion14(set); }}},
      {15, {"correlated targets", [&] { return criterion15(scaling, set); }}},
      {16, {"determinism", [&] { return criterion16(set); }}},
  };

  int unexpected = 0;
  for (int c : selected) {
    const auto it = table.find(c);
    if (it == table.end()) {
      std::cerr << "unknown criterion " << c << "\n";
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = it->second.second();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool tolerated = !out.pass && allowed.count(c);
    std::cout << "criterion " << std::setw(2) << c << ": " << (out.pass ? "PASS" : "FAIL") << "  " << it->second.first
              << (tolerated ? "  [known failure]" : "") << "  (" << std::fixed << std::setprecision(1) << secs
              << " s)" << std::defaultfloat << "\n";
    for (const auto& d : out.details) std::cout << "    " << d << "\n";
    std::cout.flush();
    if (!out.pass && !tolerated) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
