#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

namespace lbmh {

using ScalarFn = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

/// Non-adaptive 15-point Kronrod estimate on a finite interval; `error` receives
/// |K15 - G7| when non-null.
double gauss_kronrod15(const ScalarFn& f, double a, double b, double* error = nullptr);

/// Globally adaptive Gauss–Kronrod integration. Infinite limits are mapped onto
/// finite intervals. Stops when the summed error estimate is below abs_tol.
QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol = 1e-10,
                                    int max_intervals = 4000);

/// As integrate_adaptive but throws NumericalError on non-convergence.
double integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-10);

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Nodes and weights for integrals against exp(-x^2).
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussHermiteRule gauss_hermite_rule(int order);

}  // namespace lbmh
