#include "lbmh/proposal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "lbmh/error.hpp"
#include "lbmh/quadrature.hpp"

namespace lbmh {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kLogSqrtPi = 0.57236494292470008707;

template <typename Range>
double log_sum_exp(const Range& terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (double t : terms) top = std::max(top, t);
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

bool gamma_family(const BalancingFunction& g) {
  return g.kind() == BalancingKind::sqrt || g.kind() == BalancingKind::g_gamma;
}

}  // namespace

std::string to_string(ProposalPath path) {
  switch (path) {
    case ProposalPath::barker_flip: return "barker_flip";
    case ProposalPath::gamma_gaussian: return "gamma_gaussian";
    case ProposalPath::discrete_atoms: return "discrete_atoms";
    case ProposalPath::rwm: return "rwm";
  }
  return "?";
}

LBProposal::LBProposal(BalancingFunction g, NoiseDistribution mu, double sigma,
                       std::optional<ProposalPath> path)
    : g_(std::move(g)), mu_(std::move(mu)), path_(ProposalPath::rwm), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("proposal scale must be positive");
  const bool barker = g_.kind() == BalancingKind::barker;
  const bool gauss = mu_.kind() == NoiseKind::gaussian;
  if (!path) {
    if (barker) {
      path = ProposalPath::barker_flip;
    } else if (mu_.discrete()) {
      path = ProposalPath::discrete_atoms;
    } else if (gamma_family(g_) && gauss) {
      path = ProposalPath::gamma_gaussian;
    } else {
      throw ConfigError("no sampling path for balancing '" + g_.name() + "' with noise '" +
                        mu_.name() + "'");
    }
  }
  switch (*path) {
    case ProposalPath::barker_flip:
      if (!barker) throw ConfigError("barker_flip path requires the Barker balancing function");
      break;
    case ProposalPath::gamma_gaussian:
      if (!gamma_family(g_) || !gauss) {
        throw ConfigError("gamma_gaussian path requires g_gamma/sqrt with Gaussian noise");
      }
      break;
    case ProposalPath::discrete_atoms:
      if (!mu_.discrete()) throw ConfigError("discrete_atoms path requires discrete noise");
      break;
    case ProposalPath::rwm:
      if (!gauss) throw ConfigError("rwm path uses Gaussian increments");
      break;
  }
  path_ = *path;
}

void LBProposal::set_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("proposal scale must be positive");
  sigma_ = sigma;
}

void LBProposal::set_precond(Eigen::VectorXd d) {
  if (d.size() && !(d.array() > 0.0).all()) throw ConfigError("preconditioner must be positive");
  precond_ = std::move(d);
}

double barker_flip_prob(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_normalizer_quadrature(const BalancingFunction& g, const NoiseDistribution& mu,
                                 double beta_sigma, int order) {
  if (mu.discrete()) throw ConfigError("quadrature normaliser is for continuous noise");
  static const GaussHermiteRule rule64 = gauss_hermite_rule(64);
  static const GaussHermiteRule rule96 = gauss_hermite_rule(96);
  const GaussHermiteRule rule = order == 64   ? rule64
                                : order == 96 ? rule96
                                              : gauss_hermite_rule(order);
  std::vector<double> terms;
  terms.reserve(rule.nodes.size() * mu.components().size());
  for (const auto& c : mu.components()) {
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double z = c.mean + M_SQRT2 * c.sd * rule.nodes(k);
      terms.push_back(std::log(c.weight) + std::log(rule.weights(k)) - kLogSqrtPi +
                      g.b(beta_sigma * z));
    }
  }
  return log_sum_exp(terms);
}

double log_normalizer(const BalancingFunction& g, const NoiseDistribution& mu, double beta_sigma) {
  const double t = beta_sigma;
  // (a) g(e^t) + g(e^-t) = 2 for Barker, so any symmetric mu gives Z = 1.
  if (g.kind() == BalancingKind::barker) return 0.0;

  // (b) finite atom sum.
  if (mu.discrete()) {
    const auto& atoms = mu.atoms();
    if (mu.kind() == NoiseKind::three_point && gamma_family(g) && std::abs(t * atoms[2].value) < 50.0) {
      // g(e^u) + g(e^-u) = 2 cosh(u/2) cosh(gamma u) on the g_gamma family
      const double u = t * atoms[2].value;
      return std::log(atoms[1].prob + 2.0 * atoms[2].prob * std::cosh(0.5 * u) * std::cosh(g.gamma() * u));
    }
    if (atoms.size() == 3) {
      const std::array<double, 3> terms = {atoms[0].log_prob + g.b(t * atoms[0].value),
                                           atoms[1].log_prob + g.b(t * atoms[1].value),
                                           atoms[2].log_prob + g.b(t * atoms[2].value)};
      return log_sum_exp(terms);
    }
    std::vector<double> terms;
    terms.reserve(atoms.size());
    for (const auto& a : atoms) terms.push_back(a.log_prob + g.b(t * a.value));
    return log_sum_exp(terms);
  }

  // (c) moment generating function of the Gaussian mixture at (1/2 +- gamma) t.
  if (gamma_family(g)) {
    if (g.kind() == BalancingKind::sqrt && mu.kind() == NoiseKind::gaussian) return t * t / 8.0;
    const double u1 = (0.5 + g.gamma()) * t;
    const double u2 = (0.5 - g.gamma()) * t;
    std::vector<double> terms;
    terms.reserve(2 * mu.components().size());
    for (const auto& c : mu.components()) {
      const double lw = std::log(c.weight) - kLn2;
      terms.push_back(lw + u1 * c.mean + 0.5 * u1 * u1 * c.sd * c.sd);
      terms.push_back(lw + u2 * c.mean + 0.5 * u2 * u2 * c.sd * c.sd);
    }
    return log_sum_exp(terms);
  }

  // (d) quadrature.
  if (!g.smooth()) {
    throw ConfigError("balancing '" + g.name() + "' needs discrete noise (normaliser is a finite sum)");
  }
  if (std::abs(t) > 20.0 && !g.bounded()) {
    throw NumericalError("normalizer unstable: |beta*sigma| > 20 with unbounded g");
  }
  const double lz64 = log_normalizer_quadrature(g, mu, t, 64);
  const double lz96 = log_normalizer_quadrature(g, mu, t, 96);
  if (std::abs(lz64 - lz96) > 1e-6) {
    throw NumericalError("normalizer quadrature self-check failed (order 64 vs 96)");
  }
  return lz64;
}

double sample_increment(const LBProposal& prop, double beta, double s, Rng& rng) {
  switch (prop.path()) {
    case ProposalPath::barker_flip: {
      const double z = prop.noise().sample(rng);
      const double keep = barker_flip_prob(beta * s * z);
      return rng.uniform() < keep ? s * z : -s * z;
    }
    case ProposalPath::gamma_gaussian: {
      const double gamma = prop.balancing().gamma();
      const double p_plus = 1.0 / (1.0 + std::exp(-gamma * s * s * beta * beta));
      const double sign = rng.uniform() < p_plus ? 1.0 : -1.0;
      const double z = rng.normal();
      return (0.5 + sign * gamma) * s * s * beta + s * z;
    }
    case ProposalPath::discrete_atoms: {
      const auto& atoms = prop.noise().atoms();
      const auto& g = prop.balancing();
      const double t = beta * s;
      double weights[8];
      std::vector<double> heap_weights;
      double* w = weights;
      if (atoms.size() > 8) {
        heap_weights.resize(atoms.size());
        w = heap_weights.data();
      }
      double top = -std::numeric_limits<double>::infinity();
      if (prop.noise().kind() == NoiseKind::three_point) {
        // b(0) = 0 and b(-u) = b(u) - u
        const double u = t * atoms[2].value;
        const double bu = g.b(u);
        w[0] = atoms[0].log_prob + bu - u;
        w[1] = atoms[1].log_prob;
        w[2] = atoms[2].log_prob + bu;
        top = std::max({w[0], w[1], w[2]});
      } else {
        for (std::size_t k = 0; k < atoms.size(); ++k) {
          w[k] = atoms[k].log_prob + g.b(t * atoms[k].value);
          top = std::max(top, w[k]);
        }
      }
      double total = 0.0;
      for (std::size_t k = 0; k < atoms.size(); ++k) total += (w[k] = std::exp(w[k] - top));
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        acc += w[k];
        if (u < acc) return s * atoms[k].value;
      }
      return s * atoms.back().value;
    }
    case ProposalPath::rwm: return s * rng.normal();
  }
  return 0.0;
}

void propose_into(const LBProposal& prop, const TargetModel& model, const EvaluatedPoint& x,
                  EvaluatedPoint& y, Rng& rng) {
  const Eigen::Index n = x.x.size();
  y.x.resize(n);
  const bool uses_gradient = prop.path() != ProposalPath::rwm;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double beta = uses_gradient ? x.gradient(i) : 0.0;
    if (!std::isfinite(beta)) {
      throw NumericalError("non-finite gradient at coordinate " + std::to_string(i));
    }
    y.x(i) = x.x(i) + sample_increment(prop, beta, prop.scale(i), rng);
  }
  model.evaluate(y.x, y);
}

ProposalDraw propose(const LBProposal& prop, const TargetModel& model, const EvaluatedPoint& x,
                     Rng& rng) {
  ProposalDraw d;
  propose_into(prop, model, x, d.y, rng);
  return d;
}

}  // namespace lbmh
