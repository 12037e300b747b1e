#pragma once

// Reference computations kept independent of the library: composite Simpson
// integration on uniform grids, tabulated CDFs, a direct KS distance, and
// central finite differences.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Normalised CDF of an unnormalised density on [lo, hi], tabulated on a fine grid.
class TabulatedCdf {
 public:
  TabulatedCdf(const std::function<double(double)>& density, double lo, double hi, int cells = 200000)
      : lo_(lo), h_((hi - lo) / cells), cdf_(static_cast<std::size_t>(cells) + 1, 0.0) {
    double prev = density(lo);
    for (int i = 1; i <= cells; ++i) {
      const double x = lo + i * h_;
      const double mid = density(x - 0.5 * h_);
      const double cur = density(x);
      cdf_[static_cast<std::size_t>(i)] = cdf_[static_cast<std::size_t>(i) - 1] + h_ * (prev + 4.0 * mid + cur) / 6.0;
      prev = cur;
    }
    const double total = cdf_.back();
    for (auto& c : cdf_) c /= total;
    total_ = total;
  }
  double operator()(double x) const {
    const double pos = (x - lo_) / h_;
    if (pos <= 0) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf_.size()) return 1.0;
    const double frac = pos - static_cast<double>(i);
    return cdf_[i] + frac * (cdf_[i + 1] - cdf_[i]);
  }
  double total() const { return total_; }

 private:
  double lo_, h_;
  std::vector<double> cdf_;
  double total_ = 0.0;
};

inline double ks(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double normal_pdf(double x, double mean = 0.0, double sd = 1.0) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace oracle
