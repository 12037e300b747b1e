#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lbmh/rng.hpp"

namespace lbmh {

/// Inverse-CDF sampler built from quadrature on a fixed grid with linear
/// interpolation between grid CDF values.
class InverseCdfTable {
 public:
  InverseCdfTable(const std::function<double(double)>& log_density, double lo, double hi,
                  int points);

  double quantile(double u) const;
  double cdf(double x) const;
  double sample(Rng& rng) const { return quantile(rng.uniform()); }
  /// Probability mass outside [lo, hi] relative to the total, estimated by quadrature.
  double tail_mass() const { return tail_mass_; }

 private:
  std::vector<double> grid_;
  std::vector<double> cdf_;
  double tail_mass_ = 0.0;
};

/// One-dimensional factor pi(x) ∝ exp(phi(x)) of a product target with
/// hand-coded derivatives up to third order.
struct ProductFactor {
  std::string name;
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::function<double(double)> d2phi;
  std::function<double(double)> d3phi;
  std::function<double(Rng&)> sample;
  /// log of the integral of exp(phi) over the real line.
  double log_normalizer = 0.0;
  /// phi(x) = -x^2/2 exactly; enables vectorised evaluation.
  bool standard_gaussian = false;
};

ProductFactor make_gaussian_factor();
ProductFactor make_hyperbolic_factor(double delta_sq);

/// Builds a factor from user-supplied phi and derivatives. Verifies
/// integrability and the derivatives against finite differences; attaches an
/// inverse-CDF sampler when `sampler` is empty.
ProductFactor make_custom_factor(std::string name, std::function<double(double)> phi,
                                 std::function<double(double)> dphi,
                                 std::function<double(double)> d2phi,
                                 std::function<double(double)> d3phi,
                                 std::function<double(Rng&)> sampler = {});

/// Largest relative discrepancy between analytic derivatives and central finite
/// differences on x in {-3, -2.5, ..., 3}.
double derivative_check_error(const ProductFactor& factor);

enum class CovStructure { equicorrelated, ar1 };

/// Unit-diagonal Gaussian covariance with O(n) Cholesky and precision products.
class CovSpec {
 public:
  CovSpec(int n, CovStructure structure, double rho);

  int dim() const { return n_; }
  CovStructure structure() const { return structure_; }
  double rho() const { return rho_; }

  /// L z with L the lower Cholesky factor of Sigma.
  Eigen::VectorXd apply_cholesky(const Eigen::VectorXd& z) const;
  /// Sigma^{-1} x.
  Eigen::VectorXd apply_precision(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense_covariance() const;
  Eigen::MatrixXd dense_cholesky() const;

 private:
  int n_;
  CovStructure structure_;
  double rho_;
  // equicorrelated factor: L_jj = diag_[j], L_ij = below_[j] for i > j
  Eigen::VectorXd diag_, below_;
};

/// Observed counts and hyperparameters of the Poisson random-effects model.
struct PoissonREData {
  static constexpr int kGroups = 50;
  static constexpr int kReplicates = 5;
  static constexpr double kPriorSdMu = 10.0;
  static constexpr double kTrueMu = 5.0;

  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> y;  // kGroups x kReplicates
  double sigma_eta = 1.0;
  int regenerations = 0;

  static constexpr int dim() { return kGroups + 1; }
};

PoissonREData poisson_generate(std::uint64_t seed, double sigma_eta);

struct PoissonEval {
  double log_posterior = 0.0;
  Eigen::VectorXd gradient;
  bool clamped = false;
};

/// Log posterior (up to a constant) and gradient at state (mu, eta_1..eta_50).
PoissonEval poisson_logpost_grad(const PoissonREData& data, const Eigen::VectorXd& state);

void write_poisson_csv(const PoissonREData& data, const std::string& path);
PoissonREData read_poisson_csv(const std::string& path, double sigma_eta);

/// Draw (mu, eta) from the prior hierarchy; used to initialise chains.
Eigen::VectorXd poisson_prior_draw(const PoissonREData& data, Rng& rng);

/// A target density together with the evaluated log density and gradient.
struct EvaluatedPoint {
  Eigen::VectorXd x;
  double log_density = 0.0;
  Eigen::VectorXd gradient;
  bool clamped = false;
};

class TargetModel {
 public:
  enum class Kind { product, correlated_gaussian, poisson_re };

  static TargetModel product(ProductFactor factor, int n);
  static TargetModel correlated_gaussian(CovSpec cov);
  static TargetModel poisson_re(PoissonREData data);

  int dim() const { return dim_; }
  Kind kind() const;
  std::string describe() const;

  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  /// Fills `out` (x, log density, gradient) reusing its storage.
  void evaluate(const Eigen::VectorXd& x, EvaluatedPoint& out) const;
  EvaluatedPoint evaluate(const Eigen::VectorXd& x) const;

  /// Exact draw from the target. Throws ConfigError for the Poisson posterior.
  Eigen::VectorXd sample(Rng& rng) const;
  void sample_into(Rng& rng, Eigen::VectorXd& out) const;

  const ProductFactor* factor() const;
  const CovSpec* covariance() const;
  const PoissonREData* poisson_data() const;

 private:
  using Variant = std::variant<std::shared_ptr<const ProductFactor>, std::shared_ptr<const CovSpec>,
                               std::shared_ptr<const PoissonREData>>;
  TargetModel(int dim, Variant v) : dim_(dim), impl_(std::move(v)) {}

  int dim_;
  Variant impl_;
};

Eigen::VectorXd sample_target(const TargetModel& model, std::uint64_t seed);

}  // namespace lbmh
