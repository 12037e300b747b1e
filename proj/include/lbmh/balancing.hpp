#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace lbmh {

enum class BalancingKind { sqrt, barker, min, max, g_gamma, from_even };

/// Balancing function g on (0, inf) with g(t) = t g(1/t) and g(1) = 1.
/// Everything is evaluated through the log form b(x) = log g(e^x), which
/// satisfies b(x) = x + b(-x).
class BalancingFunction {
 public:
  static BalancingFunction sqrt();
  static BalancingFunction barker();
  static BalancingFunction min();
  static BalancingFunction max();
  static BalancingFunction g_gamma(double gamma);
  /// g_h(t) = sqrt(t) h(log t) / h(0) for an even, non-negative h.
  static BalancingFunction from_even(std::function<double(double)> h);

  BalancingKind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  std::string name() const;

  double g(double t) const;
  double b(double x) const;
  /// g''(1); empty for the non-smooth min/max kinds.
  std::optional<double> gfrak() const { return gfrak_; }
  bool bounded() const { return kind_ == BalancingKind::barker || kind_ == BalancingKind::min; }
  bool smooth() const { return kind_ != BalancingKind::min && kind_ != BalancingKind::max; }

 private:
  BalancingFunction(BalancingKind kind, double gamma) : kind_(kind), gamma_(gamma) {}

  BalancingKind kind_;
  double gamma_ = 0.0;
  std::optional<double> gfrak_;
  std::shared_ptr<const std::function<double(double)>> h_;
  double log_h0_ = 0.0;
};

BalancingFunction make_balancing(BalancingKind kind, double gamma = 0.0);

/// b(x) for the given g; free-function spelling of BalancingFunction::b.
inline double eval_b(const BalancingFunction& g, double x) { return g.b(x); }

/// h_g(x) = exp(-x/2) g(e^x), an even non-negative function.
std::function<double(double)> to_even_function(const BalancingFunction& g);

/// Alias for BalancingFunction::from_even; checks evenness on the probe grid.
BalancingFunction from_even_function(std::function<double(double)> h);

/// Stable log(1 + e^x).
double log1p_exp(double x);
/// Stable log(cosh(x)).
double log_cosh(double x);

}  // namespace lbmh
