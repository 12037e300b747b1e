#pragma once

#include <cmath>
#include <optional>

#include "lbmh/error.hpp"
#include "lbmh/targets.hpp"

namespace lbmh {

/// A = E[(phi''')^2], B = E[(phi' phi'')^2], C = E[phi' phi'' phi'''] under pi ∝ e^phi.
template <typename Scalar = double>
struct TargetFunctionals {
  Scalar A{0};
  Scalar B{0};
  Scalar C{0};
};

TargetFunctionals<double> abc_functionals(const ProductFactor& factor);

/// Throws ConfigError unless 1 <= mu4 <= sqrt(mu6) (up to rounding).
template <typename Scalar>
void check_moment_feasibility(Scalar mu4, Scalar mu6) {
  const Scalar tol = Scalar(1e-12);
  if (!(mu4 >= Scalar(1) - tol) || !(mu4 * mu4 <= mu6 * (Scalar(1) + tol))) {
    throw ConfigError("moment infeasibility: need 1 <= mu4 <= sqrt(mu6)");
  }
}

/// Limiting variance constant of the summed log-MH ratio divided by sigma^6.
/// Round-off negatives above -1e-12 are clamped to zero.
template <typename Scalar>
Scalar theta_squared(const TargetFunctionals<Scalar>& f, Scalar mu4, Scalar mu6, Scalar gfrak) {
  check_moment_feasibility(mu4, mu6);
  using std::isfinite;
  if (!isfinite(gfrak)) throw ConfigError("theta_squared needs a finite g''(1)");
  const Scalar q = Scalar(0.25) + gfrak;
  const Scalar h = Scalar(0.5) + gfrak;
  Scalar value = mu6 * (f.A / Scalar(144) + q * q * f.B - q * f.C / Scalar(6)) +
                 mu4 * (h * f.C / Scalar(6) - Scalar(2) * q * h * f.B) + h * h * f.B;
  if (value < Scalar(0)) {
    if (value > Scalar(-1e-12)) return Scalar(0);
    throw NumericalError("theta_squared evaluated negative");
  }
  return value;
}

/// Langevin-case theta^2 written via integration by parts:
/// 5/48 E[(phi''')^2] - 1/16 E[(phi'')^3].
double theta_squared_langevin_ibp(const ProductFactor& factor);

/// Root s* of 2/3 = s phi_N(s) / Phi(-s) (bisection on [1e-6, 10] to 1e-12).
double stationarity_root();
/// C_h = 2^{5/3} (s*)^{2/3} Phi(-s*), so that h(l*) = C_h theta^{-2/3}.
double efficiency_constant();

double standard_normal_cdf(double x);
double standard_normal_pdf(double x);

/// h(l) = 2 l^2 Phi(-l^3 theta / 2).
double h_of_ell(double ell, double theta);

struct EfficiencySummary {
  double theta_sq = 0.0;
  /// True when theta^2 = 0: efficiency is unbounded at this order and no l* exists.
  bool degenerate = false;
  std::optional<double> ell_star;
  std::optional<double> h_star;
  std::optional<double> limiting_acc;
  std::optional<double> s_star;
};

EfficiencySummary optimal_ell(double theta_sq);

/// Minimiser in g''(1) of theta^2 for fixed noise moments.
template <typename Scalar>
Scalar optimal_gfrak_fixed_mu(const TargetFunctionals<Scalar>& f, Scalar mu4, Scalar mu6) {
  if (!(f.B > Scalar(0))) throw ConfigError("optimal g''(1) needs B > 0");
  const Scalar denom = mu6 - Scalar(2) * mu4 + Scalar(1);
  if (denom == Scalar(0)) {
    throw ConfigError("mu6 - 2 mu4 + 1 = 0: all balancing functions are equivalent for this noise");
  }
  return (mu6 * (f.C - Scalar(3) * f.B) + mu4 * (Scalar(9) * f.B - f.C) - Scalar(6) * f.B) /
         (Scalar(12) * f.B * denom);
}

/// g''(1) paired with three-point noise (mu6 = mu4^2) that approaches the lower bound as mu4 -> 1.
template <typename Scalar>
Scalar optimal_gfrak_joint(const TargetFunctionals<Scalar>& f, Scalar mu4) {
  if (!(f.B > Scalar(0))) throw ConfigError("optimal g''(1) needs B > 0");
  if (!(mu4 > Scalar(1))) throw ConfigError("joint optimum requires mu4 > 1");
  return (mu4 * (f.C - Scalar(3) * f.B) + Scalar(6) * f.B) / (Scalar(12) * f.B * (mu4 - Scalar(1)));
}

/// (A - C^2 / B) / 144: no choice of g or mu gets theta^2 below this.
template <typename Scalar>
Scalar theta_lower_bound(const TargetFunctionals<Scalar>& f) {
  if (!(f.B > Scalar(0))) throw ConfigError("lower bound needs B > 0");
  return (f.A - f.C * f.C / f.B) / Scalar(144);
}

/// Predicted ESJD ratio of design 1 over design 2 when both are optimally
/// tuned: (theta_2^2 / theta_1^2)^{1/3}.
template <typename Scalar>
Scalar efficiency_ratio(Scalar theta_sq_1, Scalar theta_sq_2) {
  if (!(theta_sq_1 > Scalar(0)) || !(theta_sq_2 > Scalar(0))) {
    throw ConfigError("efficiency_ratio needs positive theta^2 values");
  }
  using std::cbrt;
  return cbrt(theta_sq_2 / theta_sq_1);
}

}  // namespace lbmh
