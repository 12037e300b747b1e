#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lbmh/asymptotics.hpp"
#include "lbmh/presets.hpp"
#include "lbmh/proposal.hpp"
#include "lbmh/targets.hpp"

namespace lbmh {

struct EsjdEstimate {
  double esjd = 0.0;
  double std_err = 0.0;
  double acc_rate = 0.0;
  long n_samples = 0;
};

struct EsjdOptions {
  long n_samples = 200000;
  /// Coordinate whose squared jump is recorded; -1 averages over all coordinates.
  int tracked = -1;
  /// Samples per random stream; stream c is seeded with derive_seed(seed, c).
  long chunk = 256;
};

/// One proposal from each of n_samples exact draws X ~ pi; averages the
/// squared jump weighted by the acceptance probability.
EsjdEstimate esjd_direct(const LBProposal& prop, const TargetModel& model, std::uint64_t seed,
                         const EsjdOptions& options = {});

struct SigmaSearchOptions {
  /// Bracket centre; defaults to theory_sigma0 for the preset and target.
  std::optional<double> sigma0;
  double half_width = 3.0;  // in log sigma
  int iterations = 30;
  EsjdOptions esjd;
};

struct SigmaOptimum {
  double sigma_opt = 0.0;
  EsjdEstimate estimate;
  int evaluations = 0;
  bool widened = false;
};

/// Golden-section maximisation of ESJD over log sigma. Every evaluation reuses
/// the same seed, so sigma values share their random numbers.
SigmaOptimum optimize_sigma(const Preset& preset, const TargetModel& model, std::uint64_t seed,
                            const SigmaSearchOptions& options = {});

/// Bracket centre for the step-size search: l* n^{-1/6} scaled by the smallest
/// conditional standard deviation, 2.38 / sqrt(n I) for rwm, 1 if theta^2 = 0.
double theory_sigma0(const Preset& preset, const TargetModel& model);

/// Functionals used for design decisions on a model: the product factor's own,
/// or those of the standard Gaussian for correlated Gaussian targets.
TargetFunctionals<double> design_functionals(const TargetModel& model);

struct ScanRow {
  int n = 0;
  std::string preset;
  double sigma_opt = 0.0;
  double esjd = 0.0;
  double acc = 0.0;
  double esjd_scaled = 0.0;  // n^{1/3} esjd
  double std_err = 0.0;
};

struct ScanOptions {
  SigmaSearchOptions search;
  unsigned threads = 1;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  /// Least-squares slope of log esjd on log n over the upper half of the grid.
  std::map<std::string, double> slopes;

  const ScanRow& at(const std::string& preset, int n) const;
};

using ModelBuilder = std::function<TargetModel(int n)>;

ScanResult scan_models(const std::vector<PresetSpec>& presets, const ModelBuilder& build,
                       const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options);

ScanResult esjd_scan(const std::vector<PresetSpec>& presets, const ProductFactor& factor,
                     const std::vector<int>& n_grid, std::uint64_t seed, const ScanOptions& options = {});

/// Isotropic proposals on N(0, Sigma), rows report ESJD averaged over coordinates.
ScanResult correlated_scan(const std::vector<PresetSpec>& presets, CovStructure structure, double rho,
                           const std::vector<int>& n_grid, std::uint64_t seed,
                           const ScanOptions& options = {});

struct SweepRow {
  int n = 0;
  double mu4 = 0.0;
  double esjd = 0.0;
  double acc = 0.0;
  double sigma_opt = 0.0;
};

/// Three-point noise with each mu4 and the matching joint-optimal g''(1).
std::vector<SweepRow> mu4_sweep(const ProductFactor& factor, const std::vector<double>& mu4_list,
                                const std::vector<int>& n_grid, std::uint64_t seed,
                                const ScanOptions& options = {});

double log_log_slope(const std::vector<double>& n, const std::vector<double>& y);

struct CltCheck {
  double ell = 0.0;
  double theta_sq = 0.0;
  int n = 0;
  long n_samples = 0;
  double emp_mean = 0.0;
  double emp_var = 0.0;
  double pred_mean = 0.0;
  double pred_var = 0.0;
  double ks_stat = 0.0;
  std::vector<double> draws;  // the summed log-MH ratios, in replicate order
};

CltCheck clt_check(const PresetSpec& preset, const ProductFactor& factor, int n, double ell,
                   long n_samples, std::uint64_t seed, unsigned threads = 1);

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

struct PoissonConfig {
  std::vector<double> scenarios{1.0, 3.0};
  int reps = 20;
  long iterations = 20000;
  std::vector<PresetSpec> presets;  // empty = barker, barker-bimodal(0.1), mala, rwm
  /// Fresh data per repetition; otherwise one dataset per scenario.
  bool regenerate_data = true;
  double adapt_fraction = 0.5;
  double burn_in_fraction = 0.5;
  unsigned threads = 1;
};

struct PoissonRow {
  double scenario = 0.0;  // sigma_eta
  int rep = 0;
  std::string preset;
  double median_ess = 0.0;
  double min_ess = 0.0;
  double acc = 0.0;
  bool diverged = false;
};

struct PoissonResult {
  std::vector<PoissonRow> rows;

  /// Median over repetitions of the per-repetition median-ESS ratio.
  double median_ratio(double scenario, const std::string& numerator, const std::string& denominator) const;
};

PoissonResult poisson_experiment(const PoissonConfig& config, std::uint64_t seed);

void write_scan_csv(const std::vector<ScanRow>& rows, const std::string& path);
void write_clt_csv(const std::vector<CltCheck>& rows, const std::string& path);
void write_poisson_result_csv(const std::vector<PoissonRow>& rows, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace lbmh
