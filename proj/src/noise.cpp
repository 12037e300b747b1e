#include "lbmh/noise.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lbmh/error.hpp"

namespace lbmh {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

// Raw moments E[(m + sZ)^k] for k = 2, 4, 6.
double gaussian_moment(double m, double s, int k) {
  const double m2 = m * m, s2 = s * s;
  switch (k) {
    case 2: return m2 + s2;
    case 4: return m2 * m2 + 6.0 * m2 * s2 + 3.0 * s2 * s2;
    case 6: return m2 * m2 * m2 + 15.0 * m2 * m2 * s2 + 45.0 * m2 * s2 * s2 + 15.0 * s2 * s2 * s2;
  }
  return 0.0;
}

}  // namespace

double bimodal_mu4(double s) {
  const double s2 = s * s;
  return 1.0 + 4.0 * s2 - 2.0 * s2 * s2;
}

double bimodal_mu6(double s) {
  const double s2 = s * s;
  return 1.0 + 12.0 * s2 + 18.0 * s2 * s2 - 16.0 * s2 * s2 * s2;
}

void NoiseDistribution::check_moments() const {
  constexpr double tol = 1e-12;
  if (!(mu4_ >= 1.0 - tol) || !(mu4_ * mu4_ <= mu6_ * (1.0 + tol))) {
    throw ConfigError("noise moments violate 1 <= mu4 <= sqrt(mu6)");
  }
}

NoiseDistribution NoiseDistribution::gaussian() {
  NoiseDistribution d(NoiseKind::gaussian, 0.0);
  d.components_ = {{1.0, 0.0, 1.0}};
  d.mu4_ = 3.0;
  d.mu6_ = 15.0;
  return d;
}

NoiseDistribution NoiseDistribution::rademacher() {
  NoiseDistribution d(NoiseKind::rademacher, 0.0);
  d.atoms_ = {{-1.0, 0.5, std::log(0.5)}, {1.0, 0.5, std::log(0.5)}};
  d.mu4_ = 1.0;
  d.mu6_ = 1.0;
  return d;
}

NoiseDistribution NoiseDistribution::bimodal(double sigma_b) {
  if (!(sigma_b > 0.0 && sigma_b < 1.0)) throw ConfigError("bimodal noise needs sigma_b in (0, 1)");
  NoiseDistribution d(NoiseKind::bimodal, sigma_b);
  const double m = std::sqrt(1.0 - sigma_b * sigma_b);
  d.components_ = {{0.5, -m, sigma_b}, {0.5, m, sigma_b}};
  d.mu4_ = bimodal_mu4(sigma_b);
  d.mu6_ = bimodal_mu6(sigma_b);
  d.check_moments();
  return d;
}

NoiseDistribution NoiseDistribution::three_point(double a) {
  if (!(a > 1.0) || !std::isfinite(a)) throw ConfigError("three-point noise needs a > 1");
  NoiseDistribution d(NoiseKind::three_point, a);
  const double r = std::sqrt(a);
  const double tail = 0.5 / a;
  d.atoms_ = {{-r, tail, std::log(tail)}, {0.0, 1.0 - 1.0 / a, std::log1p(-1.0 / a)}, {r, tail, std::log(tail)}};
  d.mu4_ = a;
  d.mu6_ = a * a;
  d.check_moments();
  return d;
}

NoiseDistribution NoiseDistribution::gaussian_mixture(std::vector<MixtureComponent> components) {
  if (components.empty()) throw ConfigError("mixture needs at least one component");
  NoiseDistribution d(NoiseKind::gaussian_mixture, 0.0);
  double wsum = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !(c.sd > 0.0)) throw ConfigError("mixture weights and sds must be positive");
    wsum += c.weight;
  }
  for (auto& c : components) {
    c.weight /= wsum;
    m2 += c.weight * gaussian_moment(c.mean, c.sd, 2);
    m4 += c.weight * gaussian_moment(c.mean, c.sd, 4);
    m6 += c.weight * gaussian_moment(c.mean, c.sd, 6);
  }
  // symmetry: every component must have a mirrored partner
  for (const auto& c : components) {
    double mirror = 0.0;
    for (const auto& o : components) {
      if (std::abs(o.mean + c.mean) < 1e-12 && std::abs(o.sd - c.sd) < 1e-12) mirror += o.weight;
    }
    double self = 0.0;
    for (const auto& o : components) {
      if (std::abs(o.mean - c.mean) < 1e-12 && std::abs(o.sd - c.sd) < 1e-12) self += o.weight;
    }
    if (std::abs(mirror - self) > 1e-12) throw ConfigError("mixture is not symmetric about zero");
  }
  if (std::abs(m2 - 1.0) > 1e-12) throw ConfigError("mixture must have unit variance");
  d.components_ = std::move(components);
  d.mu4_ = m4;
  d.mu6_ = m6;
  d.check_moments();
  return d;
}

std::string NoiseDistribution::name() const {
  std::ostringstream os;
  switch (kind_) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::rademacher: return "rademacher";
    case NoiseKind::bimodal: os << "bimodal(" << parameter_ << ")"; return os.str();
    case NoiseKind::three_point: os << "three_point(" << parameter_ << ")"; return os.str();
    case NoiseKind::gaussian_mixture: return "gaussian_mixture";
  }
  return "?";
}

double NoiseDistribution::sample(Rng& rng) const {
  switch (kind_) {
    case NoiseKind::gaussian: return rng.normal();
    case NoiseKind::rademacher: return rng.uniform() < 0.5 ? -1.0 : 1.0;
    case NoiseKind::three_point: {
      const double u = rng.uniform();
      if (u < atoms_[0].prob) return atoms_[0].value;
      if (u < atoms_[0].prob + atoms_[2].prob) return atoms_[2].value;
      return 0.0;
    }
    case NoiseKind::bimodal:
    case NoiseKind::gaussian_mixture: {
      const double u = rng.uniform();
      const double z = rng.normal();
      double acc = 0.0;
      for (const auto& c : components_) {
        acc += c.weight;
        if (u < acc) return c.mean + c.sd * z;
      }
      return components_.back().mean + components_.back().sd * z;
    }
  }
  return 0.0;
}

double NoiseDistribution::log_density(double z) const {
  if (discrete()) {
    double p = 0.0;
    for (const auto& a : atoms_) {
      if (a.value == z) p += a.prob;
    }
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  }
  // symmetric law: evaluate at |z| so that both signs give identical bits
  z = std::abs(z);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    const double u = (z - c.mean) / c.sd;
    terms.push_back(std::log(c.weight) - 0.5 * u * u - std::log(c.sd) - kHalfLog2Pi);
    top = std::max(top, terms.back());
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

NoiseDistribution make_gaussian_noise() { return NoiseDistribution::gaussian(); }
NoiseDistribution make_rademacher() { return NoiseDistribution::rademacher(); }
NoiseDistribution make_bimodal(double sigma_b) { return NoiseDistribution::bimodal(sigma_b); }
NoiseDistribution make_three_point(double a) { return NoiseDistribution::three_point(a); }

}  // namespace lbmh
