#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lbmh/proposal.hpp"
#include "lbmh/targets.hpp"

namespace lbmh {

struct MHLogRatio {
  double rho = 0.0;
  /// Per-coordinate balancing/normaliser contributions, when requested.
  Eigen::VectorXd per_coord_terms;
  bool finite = true;
};

/// log[pi(y) q(y, x)] - log[pi(x) q(x, y)]. The noise densities cancel by
/// symmetry, leaving b-terms and per-coordinate log normalisers. Computed so
/// that log_mh_rho(y, x) is the exact negation of log_mh_rho(x, y).
MHLogRatio log_mh_rho(const LBProposal& prop, const EvaluatedPoint& x, const EvaluatedPoint& y,
                      bool keep_terms = false);

struct StepResult {
  bool accepted = false;
  double rho = 0.0;
  double accept_prob = 0.0;
  bool rho_finite = true;
};

/// One Metropolis–Hastings transition; `current` is updated in place and
/// `scratch` holds the proposal.
StepResult mh_step(const LBProposal& prop, const TargetModel& model, EvaluatedPoint& current,
                   EvaluatedPoint& scratch, Rng& rng);

/// Robbins–Monro adaptation of a global log scale and per-coordinate variances.
struct AdaptState {
  double log_scale = 0.0;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  long t = 0;
  double target_acc = 0.574;
  double decay = 0.6;
  int warm_start = 100;

  static AdaptState start(int dim, double sigma, double target_acc);
  double learning_rate() const;
};

constexpr double kLocallyBalancedTargetAcc = 0.574;
constexpr double kRwmTargetAcc = 0.234;

struct ChainOptions {
  /// Coordinates kept in ChainOutput::samples (empty = all).
  std::vector<int> record_coords;
  int thin = 1;
  /// Adaptation runs over the first fraction of iterations, then freezes.
  double adapt_fraction = 1.0;
  /// Iterations before this fraction are excluded from samples and statistics.
  double burn_in_fraction = 0.0;
  bool compute_ess = true;
  double divergence_bound = 1e8;
  /// Optional per-iteration CSV stream (iter, coord_*, accepted, rho).
  std::ostream* csv = nullptr;
  std::vector<int> csv_coords;
};

struct ChainOutput {
  Eigen::MatrixXd samples;  // retained iterations x recorded coordinates
  double acc_rate = 0.0;
  double esjd = 0.0;        // mean squared jump of coordinate 0
  Eigen::VectorXd ess;      // per recorded coordinate
  long iterations = 0;
  bool diverged = false;
  std::string diagnostic;
  std::optional<AdaptState> adapt;
  Eigen::VectorXd final_state;
  double final_sigma = 0.0;
};

ChainOutput run_chain(const LBProposal& prop, const TargetModel& model, long n_iters,
                      const Eigen::VectorXd& init, Rng& rng,
                      std::optional<AdaptState> adapt = std::nullopt,
                      const ChainOptions& options = {});

/// Effective sample size N / (1 + 2 sum rho_k) with Geyer's initial monotone
/// sequence truncation. Needs at least 100 values; a constant series gives 1.
double ess(const Eigen::Ref<const Eigen::VectorXd>& series);

/// Empirical autocorrelations rho_0..rho_{max_lag} computed by FFT.
Eigen::VectorXd autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index max_lag);

void write_chain_csv_header(std::ostream& os, const std::vector<int>& coords);

}  // namespace lbmh
