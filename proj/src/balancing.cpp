#include "lbmh/balancing.hpp"

#include <cmath>
#include <sstream>

#include "lbmh/error.hpp"

namespace lbmh {

namespace {
constexpr double kLn2 = 0.69314718055994530942;
}

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - kLn2;
}

BalancingFunction BalancingFunction::sqrt() {
  BalancingFunction f(BalancingKind::sqrt, 0.0);
  f.gfrak_ = -0.25;
  return f;
}

BalancingFunction BalancingFunction::barker() {
  BalancingFunction f(BalancingKind::barker, 0.0);
  f.gfrak_ = -0.5;
  return f;
}

BalancingFunction BalancingFunction::min() { return BalancingFunction(BalancingKind::min, 0.0); }

BalancingFunction BalancingFunction::max() { return BalancingFunction(BalancingKind::max, 0.0); }

BalancingFunction BalancingFunction::g_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("g_gamma requires gamma >= 0");
  BalancingFunction f(BalancingKind::g_gamma, gamma);
  f.gfrak_ = gamma * gamma - 0.25;
  return f;
}

BalancingFunction BalancingFunction::from_even(std::function<double(double)> h) {
  if (!h) throw ConfigError("from_even needs a function");
  for (int k = -50; k <= 50; ++k) {
    const double x = 0.1 * k;
    const double hp = h(x), hm = h(-x);
    if (!(hp >= 0.0) || !std::isfinite(hp)) throw ConfigError("h must be finite and non-negative");
    if (std::abs(hp - hm) > 1e-10 * std::max(1.0, std::abs(hp))) {
      throw ConfigError("h is not even on the probe grid");
    }
  }
  const double h0 = h(0.0);
  if (!(h0 > 0.0)) throw ConfigError("h(0) must be positive to normalise g(1) = 1");
  BalancingFunction f(BalancingKind::from_even, 0.0);
  f.h_ = std::make_shared<const std::function<double(double)>>(std::move(h));
  f.log_h0_ = std::log(h0);
  constexpr double step = 1e-4;
  f.gfrak_ = (f.g(1.0 + step) - 2.0 * f.g(1.0) + f.g(1.0 - step)) / (step * step);
  return f;
}

std::string BalancingFunction::name() const {
  switch (kind_) {
    case BalancingKind::sqrt: return "sqrt";
    case BalancingKind::barker: return "barker";
    case BalancingKind::min: return "min";
    case BalancingKind::max: return "max";
    case BalancingKind::g_gamma: {
      std::ostringstream os;
      os << "g_gamma(" << gamma_ << ")";
      return os.str();
    }
    case BalancingKind::from_even: return "from_even";
  }
  return "?";
}

double BalancingFunction::g(double t) const {
  switch (kind_) {
    case BalancingKind::sqrt: return std::sqrt(t);
    case BalancingKind::barker: return 2.0 * t / (1.0 + t);
    case BalancingKind::min: return std::fmin(1.0, t);
    case BalancingKind::max: return std::fmax(1.0, t);
    case BalancingKind::g_gamma:
      return 0.5 * (std::pow(t, 0.5 + gamma_) + std::pow(t, 0.5 - gamma_));
    case BalancingKind::from_even: return std::sqrt(t) * (*h_)(std::log(t)) / std::exp(log_h0_);
  }
  return 0.0;
}

double BalancingFunction::b(double x) const {
  switch (kind_) {
    case BalancingKind::sqrt: return 0.5 * x;
    case BalancingKind::barker:
      return x > 0.0 ? kLn2 - std::log1p(std::exp(-x)) : kLn2 + x - std::log1p(std::exp(x));
    case BalancingKind::min: return std::fmin(0.0, x);
    case BalancingKind::max: return std::fmax(0.0, x);
    case BalancingKind::g_gamma: return 0.5 * x + log_cosh(gamma_ * x);
    case BalancingKind::from_even: return 0.5 * x + std::log((*h_)(x)) - log_h0_;
  }
  return 0.0;
}

BalancingFunction make_balancing(BalancingKind kind, double gamma) {
  switch (kind) {
    case BalancingKind::sqrt: return BalancingFunction::sqrt();
    case BalancingKind::barker: return BalancingFunction::barker();
    case BalancingKind::min: return BalancingFunction::min();
    case BalancingKind::max: return BalancingFunction::max();
    case BalancingKind::g_gamma: return BalancingFunction::g_gamma(gamma);
    case BalancingKind::from_even: break;
  }
  throw ConfigError("from_even balancing functions are built with from_even_function");
}

std::function<double(double)> to_even_function(const BalancingFunction& g) {
  return [g](double x) { return std::exp(g.b(x) - 0.5 * x); };
}

BalancingFunction from_even_function(std::function<double(double)> h) {
  return BalancingFunction::from_even(std::move(h));
}

}  // namespace lbmh
