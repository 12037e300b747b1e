#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "lbmh/balancing.hpp"
#include "lbmh/noise.hpp"
#include "lbmh/rng.hpp"
#include "lbmh/targets.hpp"

namespace lbmh {

enum class ProposalPath { barker_flip, gamma_gaussian, discrete_atoms, rwm };

std::string to_string(ProposalPath path);

/// First-order locally-balanced proposal: each coordinate is drawn from the
/// density proportional to g(exp(beta_i w)) mu(w / s_i) with s_i = sigma d_i.
class LBProposal {
 public:
  /// Picks the sampling path from (g, mu) when `path` is empty; throws
  /// ConfigError for incompatible combinations.
  LBProposal(BalancingFunction g, NoiseDistribution mu, double sigma,
             std::optional<ProposalPath> path = std::nullopt);

  const BalancingFunction& balancing() const { return g_; }
  const NoiseDistribution& noise() const { return mu_; }
  ProposalPath path() const { return path_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXd& precond() const { return precond_; }

  void set_sigma(double sigma);
  /// Per-coordinate positive scales d_i; an empty vector means d_i = 1.
  void set_precond(Eigen::VectorXd d);

  double scale(Eigen::Index i) const { return precond_.size() ? sigma_ * precond_(i) : sigma_; }

 private:
  BalancingFunction g_;
  NoiseDistribution mu_;
  ProposalPath path_;
  double sigma_;
  Eigen::VectorXd precond_;
};

/// F(t) = e^t / (1 + e^t), evaluated without overflow.
double barker_flip_prob(double t);

/// log of the per-coordinate normaliser  int g(exp(beta_sigma z)) mu(dz).
/// Exact for Barker g, discrete mu, and g_gamma with Gaussian-mixture mu;
/// otherwise Gauss–Hermite quadrature (order 64, cross-checked at 96).
double log_normalizer(const BalancingFunction& g, const NoiseDistribution& mu, double beta_sigma);

/// The quadrature branch on its own, for any smooth g and continuous mu.
double log_normalizer_quadrature(const BalancingFunction& g, const NoiseDistribution& mu,
                                 double beta_sigma, int order = 64);

/// One coordinate increment w = y_i - x_i given gradient beta and scale s.
double sample_increment(const LBProposal& prop, double beta, double s, Rng& rng);

struct ProposalDraw {
  EvaluatedPoint y;
};

/// Proposes from x (whose gradient is already evaluated) and evaluates the
/// target at the proposal. Reuses the storage of `y`.
void propose_into(const LBProposal& prop, const TargetModel& model, const EvaluatedPoint& x,
                  EvaluatedPoint& y, Rng& rng);

ProposalDraw propose(const LBProposal& prop, const TargetModel& model, const EvaluatedPoint& x,
                     Rng& rng);

}  // namespace lbmh
