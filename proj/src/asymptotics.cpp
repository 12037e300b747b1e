#include "lbmh/asymptotics.hpp"

#include <cmath>

#include "lbmh/quadrature.hpp"

namespace lbmh {

namespace {

// E_pi[f] for pi ∝ exp(phi), normalised with the factor's stored constant.
double expectation(const ProductFactor& factor, const std::function<double(double)>& f) {
  const auto r = integrate_adaptive(
      [&](double x) {
        const double w = std::exp(factor.phi(x) - factor.log_normalizer);
        return w > 0.0 ? f(x) * w : 0.0;
      },
      -kInf, kInf, 1e-8);
  if (!r.converged) throw NumericalError("functional quadrature did not converge for " + factor.name);
  return r.value;
}

}  // namespace

TargetFunctionals<double> abc_functionals(const ProductFactor& factor) {
  TargetFunctionals<double> f;
  f.A = expectation(factor, [&](double x) {
    const double d3 = factor.d3phi(x);
    return d3 * d3;
  });
  f.B = expectation(factor, [&](double x) {
    const double v = factor.dphi(x) * factor.d2phi(x);
    return v * v;
  });
  f.C = expectation(factor, [&](double x) { return factor.dphi(x) * factor.d2phi(x) * factor.d3phi(x); });
  return f;
}

double theta_squared_langevin_ibp(const ProductFactor& factor) {
  for (double edge : {-40.0, 40.0}) {
    const double d2 = factor.d2phi(edge);
    const double boundary = std::exp(factor.phi(edge) - factor.log_normalizer) * factor.dphi(edge) * d2 * d2;
    if (!(std::abs(boundary) < 1e-8)) {
      throw NumericalError("integration-by-parts boundary term does not vanish for " + factor.name);
    }
  }
  const double a = expectation(factor, [&](double x) {
    const double d3 = factor.d3phi(x);
    return d3 * d3;
  });
  const double c3 = expectation(factor, [&](double x) {
    const double d2 = factor.d2phi(x);
    return d2 * d2 * d2;
  });
  return 5.0 / 48.0 * a - c3 / 16.0;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

double standard_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double stationarity_root() {
  static const double root = [] {
    auto f = [](double s) { return s * standard_normal_pdf(s) / standard_normal_cdf(-s) - 2.0 / 3.0; };
    double lo = 1e-6, hi = 10.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return root;
}

double efficiency_constant() {
  const double s = stationarity_root();
  return std::pow(2.0, 5.0 / 3.0) * std::pow(s, 2.0 / 3.0) * standard_normal_cdf(-s);
}

double h_of_ell(double ell, double theta) {
  return 2.0 * ell * ell * standard_normal_cdf(-ell * ell * ell * theta / 2.0);
}

EfficiencySummary optimal_ell(double theta_sq) {
  EfficiencySummary out;
  out.theta_sq = theta_sq;
  if (!(theta_sq >= 0.0)) throw ConfigError("theta^2 must be non-negative");
  if (theta_sq == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double theta = std::sqrt(theta_sq);
  const double s = stationarity_root();
  const double ell = std::cbrt(2.0 * s / theta);
  out.s_star = s;
  out.ell_star = ell;
  out.h_star = 2.0 * ell * ell * standard_normal_cdf(-s);
  out.limiting_acc = 2.0 * standard_normal_cdf(-s);
  return out;
}

}  // namespace lbmh
