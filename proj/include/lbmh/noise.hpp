#pragma once

#include <string>
#include <vector>

#include "lbmh/rng.hpp"

namespace lbmh {

enum class NoiseKind { gaussian, rademacher, bimodal, three_point, gaussian_mixture };

struct Atom {
  double value;
  double prob;
  double log_prob = 0.0;
};

struct MixtureComponent {
  double weight;
  double mean;
  double sd;
};

/// Symmetric, unit-variance increment law. Continuous kinds are Gaussian
/// mixtures; discrete kinds carry an explicit atom list.
class NoiseDistribution {
 public:
  static NoiseDistribution gaussian();
  static NoiseDistribution rademacher();
  /// Even mixture of N(+-sqrt(1 - s^2), s^2), s in (0, 1).
  static NoiseDistribution bimodal(double sigma_b);
  /// Atoms -sqrt(a), 0, +sqrt(a) with P(nonzero) = 1/a, a > 1.
  static NoiseDistribution three_point(double a);
  /// General Gaussian mixture; must be symmetric with unit variance.
  static NoiseDistribution gaussian_mixture(std::vector<MixtureComponent> components);

  NoiseKind kind() const { return kind_; }
  std::string name() const;
  double parameter() const { return parameter_; }
  double mu4() const { return mu4_; }
  double mu6() const { return mu6_; }
  bool discrete() const { return !atoms_.empty(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<MixtureComponent>& components() const { return components_; }

  double sample(Rng& rng) const;
  /// Log density for continuous kinds; log probability of an exact atom match
  /// (or -inf) for discrete kinds.
  double log_density(double z) const;

 private:
  NoiseDistribution(NoiseKind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  void check_moments() const;

  NoiseKind kind_;
  double parameter_ = 0.0;
  double mu4_ = 0.0;
  double mu6_ = 0.0;
  std::vector<Atom> atoms_;
  std::vector<MixtureComponent> components_;
};

NoiseDistribution make_gaussian_noise();
NoiseDistribution make_rademacher();
NoiseDistribution make_bimodal(double sigma_b);
NoiseDistribution make_three_point(double a);

/// Fourth and sixth moments of the even mixture N(+-sqrt(1 - s^2), s^2).
double bimodal_mu4(double sigma_b);
double bimodal_mu6(double sigma_b);

}  // namespace lbmh
