#include "lbmh/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "lbmh/error.hpp"

namespace lbmh {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b, value, error;
  bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace

double gauss_kronrod15(const ScalarFn& f, double a, double b, double* error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  if (error) *error = std::abs((kronrod - gauss) * half);
  return kronrod * half;
}

QuadratureResult integrate_adaptive(const ScalarFn& f, double a, double b, double abs_tol,
                                    int max_intervals) {
  if (a == b) return {0.0, 0.0, 0, true};
  if (a > b) {
    auto r = integrate_adaptive(f, b, a, abs_tol, max_intervals);
    r.value = -r.value;
    return r;
  }

  // Map infinite ranges onto finite ones.
  ScalarFn g;
  double lo = a, hi = b;
  if (std::isinf(a) && std::isinf(b)) {
    g = [&f](double t) {
      const double d = 1.0 - t * t;
      return f(t / d) * (1.0 + t * t) / (d * d);
    };
    lo = -1.0;
    hi = 1.0;
  } else if (std::isinf(b)) {
    g = [&f, a](double t) {
      const double d = 1.0 - t;
      return f(a + t / d) / (d * d);
    };
    lo = 0.0;
    hi = 1.0;
  } else if (std::isinf(a)) {
    g = [&f, b](double t) {
      const double d = 1.0 - t;
      return f(b - t / d) / (d * d);
    };
    lo = 0.0;
    hi = 1.0;
  } else {
    g = f;
  }

  std::priority_queue<Interval> heap;
  double err = 0.0;
  double value = gauss_kronrod15(g, lo, hi, &err);
  heap.push({lo, hi, value, err});
  double total_err = err;
  int count = 1;
  while (total_err > abs_tol && count < max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    double e1 = 0.0, e2 = 0.0;
    const double v1 = gauss_kronrod15(g, worst.a, mid, &e1);
    const double v2 = gauss_kronrod15(g, mid, worst.b, &e2);
    heap.push({worst.a, mid, v1, e1});
    heap.push({mid, worst.b, v2, e2});
    value += v1 + v2 - worst.value;
    total_err += e1 + e2 - worst.error;
    ++count;
    if (!std::isfinite(value)) break;
  }
  // Re-sum to drop accumulated cancellation from the running updates.
  value = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  return {value, total_err, count, std::isfinite(value) && total_err <= abs_tol};
}

double integrate(const ScalarFn& f, double a, double b, double abs_tol) {
  const auto r = integrate_adaptive(f, a, b, abs_tol);
  if (!r.converged) {
    throw NumericalError("quadrature did not converge (error estimate " +
                         std::to_string(r.abs_error) + ")");
  }
  return r.value;
}

GaussHermiteRule gauss_hermite_rule(int order) {
  if (order < 1) throw ConfigError("Gauss-Hermite order must be positive");
  // Golub-Welsch for starting values, then Newton polish on the orthonormal
  // recurrence so that small tail weights keep full relative accuracy.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule{solver.eigenvalues(), Eigen::VectorXd(order)};
  const double pim4 = std::pow(M_PI, -0.25);
  for (int i = 0; i < order; ++i) {
    double z = rule.nodes(i);
    double pp = 0.0;
    for (int it = 0; it < 20; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(static_cast<double>(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * order) * p2;
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes(i) = z;
    rule.weights(i) = 2.0 / (pp * pp);
  }
  return rule;
}

}  // namespace lbmh
