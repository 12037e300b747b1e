#include "lbmh/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lbmh/error.hpp"
#include "lbmh/quadrature.hpp"

namespace lbmh {

namespace {


double log_integral_of_exp(const std::function<double(double)>& phi, const std::string& name) {
  double shift = -kInf;
  for (double x = -10.0; x <= 10.0; x += 0.25) shift = std::max(shift, phi(x));
  if (!std::isfinite(shift)) throw ConfigError("factor '" + name + "': phi not finite near origin");
  const auto r = integrate_adaptive([&](double x) { return std::exp(phi(x) - shift); }, -kInf, kInf,
                                    1e-10);
  if (!r.converged || !(r.value > 0.0)) {
    throw ConfigError("factor '" + name + "': exp(phi) is not integrable over the real line");
  }
  return shift + std::log(r.value);
}

}  // namespace

// ---------------------------------------------------------------------------
// InverseCdfTable

InverseCdfTable::InverseCdfTable(const std::function<double(double)>& log_density, double lo,
                                 double hi, int points) {
  if (!(lo < hi) || points < 2) throw ConfigError("inverse-CDF table needs lo < hi and >= 2 points");
  // sinh spacing: dense near the origin, coarse in the tails.
  constexpr double c = 0.5;
  const double t0 = std::asinh(lo / c);
  const double t1 = std::asinh(hi / c);
  grid_.resize(points);
  for (int k = 0; k < points; ++k) grid_[k] = c * std::sinh(t0 + (t1 - t0) * k / (points - 1));
  grid_.front() = lo;
  grid_.back() = hi;

  double shift = -kInf;
  for (double x : grid_) shift = std::max(shift, log_density(x));
  auto density = [&](double x) { return std::exp(log_density(x) - shift); };

  cdf_.assign(points, 0.0);
  for (int k = 1; k < points; ++k) cdf_[k] = cdf_[k - 1] + gauss_kronrod15(density, grid_[k - 1], grid_[k]);
  const double inside = cdf_.back();
  const double left = integrate(density, -kInf, lo, 1e-14);
  const double right = integrate(density, hi, kInf, 1e-14);
  tail_mass_ = (left + right) / (inside + left + right);
  for (double& v : cdf_) v /= inside;
  cdf_.back() = 1.0;
}

double InverseCdfTable::quantile(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.front();
  if (it == cdf_.end()) return grid_.back();
  const auto k = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double span = cdf_[k + 1] - cdf_[k];
  const double frac = span > 0.0 ? (u - cdf_[k]) / span : 0.5;
  return grid_[k] + frac * (grid_[k + 1] - grid_[k]);
}

double InverseCdfTable::cdf(double x) const {
  if (x <= grid_.front()) return 0.0;
  if (x >= grid_.back()) return 1.0;
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  const auto k = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double frac = (x - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return cdf_[k] + frac * (cdf_[k + 1] - cdf_[k]);
}

// ---------------------------------------------------------------------------
// Product factors

ProductFactor make_gaussian_factor() {
  ProductFactor f;
  f.name = "gaussian";
  f.phi = [](double x) { return -0.5 * x * x; };
  f.dphi = [](double x) { return -x; };
  f.d2phi = [](double) { return -1.0; };
  f.d3phi = [](double) { return 0.0; };
  f.sample = [](Rng& rng) { return rng.normal(); };
  f.log_normalizer = log_integral_of_exp(f.phi, f.name);
  f.standard_gaussian = true;
  return f;
}

ProductFactor make_hyperbolic_factor(double delta_sq) {
  if (!(delta_sq > 0.0) || !std::isfinite(delta_sq)) {
    throw ConfigError("hyperbolic factor needs delta_sq > 0");
  }
  ProductFactor f;
  f.name = "hyperbolic";
  f.phi = [delta_sq](double x) { return -std::sqrt(delta_sq + x * x); };
  f.dphi = [delta_sq](double x) { return -x / std::sqrt(delta_sq + x * x); };
  f.d2phi = [delta_sq](double x) {
    const double r = std::sqrt(delta_sq + x * x);
    return -delta_sq / (r * r * r);
  };
  f.d3phi = [delta_sq](double x) {
    const double r2 = delta_sq + x * x;
    const double r = std::sqrt(r2);
    return 3.0 * delta_sq * x / (r2 * r2 * r);
  };
  auto table = std::make_shared<const InverseCdfTable>(f.phi, -40.0, 40.0, 4096);
  f.sample = [table](Rng& rng) { return table->sample(rng); };
  f.log_normalizer = log_integral_of_exp(f.phi, f.name);
  return f;
}

double derivative_check_error(const ProductFactor& factor) {
  constexpr double h = 1e-5;
  double worst = 0.0;
  auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
  for (int k = -6; k <= 6; ++k) {
    const double x = 0.5 * k;
    const double d1 = (factor.phi(x + h) - factor.phi(x - h)) / (2 * h);
    const double d2 = (factor.dphi(x + h) - factor.dphi(x - h)) / (2 * h);
    const double d3 = (factor.d2phi(x + h) - factor.d2phi(x - h)) / (2 * h);
    worst = std::max({worst, rel(d1, factor.dphi(x)), rel(d2, factor.d2phi(x)),
                      rel(d3, factor.d3phi(x))});
  }
  return worst;
}

ProductFactor make_custom_factor(std::string name, std::function<double(double)> phi,
                                 std::function<double(double)> dphi,
                                 std::function<double(double)> d2phi,
                                 std::function<double(double)> d3phi,
                                 std::function<double(Rng&)> sampler) {
  ProductFactor f{std::move(name), std::move(phi), std::move(dphi), std::move(d2phi),
                  std::move(d3phi), std::move(sampler), 0.0};
  f.log_normalizer = log_integral_of_exp(f.phi, f.name);
  if (const double err = derivative_check_error(f); err > 1e-5) {
    throw ConfigError("factor '" + f.name + "': derivatives disagree with finite differences (" +
                      std::to_string(err) + ")");
  }
  if (!f.sample) {
    auto table = std::make_shared<const InverseCdfTable>(f.phi, -40.0, 40.0, 4096);
    f.sample = [table](Rng& rng) { return table->sample(rng); };
  }
  return f;
}

// ---------------------------------------------------------------------------
// CovSpec

CovSpec::CovSpec(int n, CovStructure structure, double rho) : n_(n), structure_(structure), rho_(rho) {
  if (n < 1) throw ConfigError("covariance dimension must be positive");
  if (!(std::abs(rho) < 1.0)) throw ConfigError("correlation must lie in (-1, 1)");
  if (structure == CovStructure::equicorrelated) {
    diag_.resize(n);
    below_.resize(n);
    double s = 0.0;  // running sum of squared below-diagonal entries
    for (int j = 0; j < n; ++j) {
      const double d2 = 1.0 - s;
      if (!(d2 > 0.0)) throw ConfigError("equicorrelated covariance is not positive definite");
      diag_(j) = std::sqrt(d2);
      below_(j) = (rho - s) / diag_(j);
      s += below_(j) * below_(j);
    }
  }
}

Eigen::VectorXd CovSpec::apply_cholesky(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out(n_);
  if (structure_ == CovStructure::ar1) {
    const double innov = std::sqrt(1.0 - rho_ * rho_);
    out(0) = z(0);
    for (int i = 1; i < n_; ++i) out(i) = rho_ * out(i - 1) + innov * z(i);
  } else {
    double prefix = 0.0;
    for (int i = 0; i < n_; ++i) {
      out(i) = prefix + diag_(i) * z(i);
      prefix += below_(i) * z(i);
    }
  }
  return out;
}

Eigen::VectorXd CovSpec::apply_precision(const Eigen::VectorXd& x) const {
  if (structure_ == CovStructure::equicorrelated) {
    const double k = rho_ / (1.0 + (n_ - 1) * rho_);
    return (x.array() - k * x.sum()).matrix() / (1.0 - rho_);
  }
  if (n_ == 1) return x;
  const double inv = 1.0 / (1.0 - rho_ * rho_);
  Eigen::VectorXd q(n_);
  q(0) = (x(0) - rho_ * x(1)) * inv;
  for (int i = 1; i + 1 < n_; ++i) {
    q(i) = ((1.0 + rho_ * rho_) * x(i) - rho_ * (x(i - 1) + x(i + 1))) * inv;
  }
  q(n_ - 1) = (x(n_ - 1) - rho_ * x(n_ - 2)) * inv;
  return q;
}

Eigen::MatrixXd CovSpec::dense_covariance() const {
  Eigen::MatrixXd s(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      s(i, j) = i == j ? 1.0
                : structure_ == CovStructure::ar1 ? std::pow(rho_, std::abs(i - j))
                                                  : rho_;
    }
  }
  return s;
}

Eigen::MatrixXd CovSpec::dense_cholesky() const {
  Eigen::MatrixXd l(n_, n_);
  for (int j = 0; j < n_; ++j) l.col(j) = apply_cholesky(Eigen::VectorXd::Unit(n_, j));
  return l;
}

// ---------------------------------------------------------------------------
// Poisson random effects

PoissonREData poisson_generate(std::uint64_t seed, double sigma_eta) {
  if (!(sigma_eta > 0.0) || !std::isfinite(sigma_eta)) {
    throw ConfigError("sigma_eta must be positive");
  }
  PoissonREData data;
  data.sigma_eta = sigma_eta;
  data.y.resize(PoissonREData::kGroups, PoissonREData::kReplicates);
  for (int attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, attempt));
    Eigen::VectorXd rate(PoissonREData::kGroups);
    bool overflow = false;
    for (int i = 0; i < PoissonREData::kGroups; ++i) {
      rate(i) = std::exp(PoissonREData::kTrueMu + sigma_eta * rng.normal());
      overflow = overflow || rate(i) > 1e12;
    }
    if (overflow) {
      std::cerr << "poisson_generate: rate above 1e12 on attempt " << attempt
                << ", regenerating with a fresh sub-seed\n";
      continue;
    }
    for (int i = 0; i < PoissonREData::kGroups; ++i) {
      for (int j = 0; j < PoissonREData::kReplicates; ++j) data.y(i, j) = rng.poisson(rate(i));
    }
    data.regenerations = attempt;
    return data;
  }
}

PoissonEval poisson_logpost_grad(const PoissonREData& data, const Eigen::VectorXd& state) {
  constexpr int groups = PoissonREData::kGroups;
  if (state.size() != PoissonREData::dim()) throw ConfigError("Poisson state must have 51 entries");
  const double mu = state(0);
  const double inv_var = 1.0 / (data.sigma_eta * data.sigma_eta);
  constexpr double prior_prec = 1.0 / (PoissonREData::kPriorSdMu * PoissonREData::kPriorSdMu);

  PoissonEval out;
  out.gradient.resize(PoissonREData::dim());
  double lp = -0.5 * prior_prec * mu * mu;
  double dmu = -prior_prec * mu;
  for (int i = 0; i < groups; ++i) {
    const double eta = state(i + 1);
    double exponent = eta;
    if (exponent > 700.0) {
      exponent = 700.0;
      out.clamped = true;
    }
    const double rate = std::exp(exponent);
    const double ysum = static_cast<double>(data.y.row(i).sum());
    const double dev = eta - mu;
    lp += ysum * eta - PoissonREData::kReplicates * rate - 0.5 * inv_var * dev * dev;
    out.gradient(i + 1) = ysum - PoissonREData::kReplicates * rate - inv_var * dev;
    dmu += inv_var * dev;
  }
  out.gradient(0) = dmu;
  out.log_posterior = lp;
  return out;
}

void write_poisson_csv(const PoissonREData& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  for (int i = 0; i < data.y.rows(); ++i) {
    for (int j = 0; j < data.y.cols(); ++j) os << (j ? "," : "") << data.y(i, j);
    os << '\n';
  }
}

PoissonREData read_poisson_csv(const std::string& path, double sigma_eta) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  PoissonREData data;
  data.sigma_eta = sigma_eta;
  data.y.resize(PoissonREData::kGroups, PoissonREData::kReplicates);
  std::string line;
  int i = 0;
  while (std::getline(is, line) && i < PoissonREData::kGroups) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= PoissonREData::kReplicates) throw ConfigError("too many columns in " + path);
      const long long v = std::stoll(cell);
      if (v < 0) throw ConfigError("negative count in " + path);
      data.y(i, j++) = v;
    }
    if (j != PoissonREData::kReplicates) throw ConfigError("expected 5 columns in " + path);
    ++i;
  }
  if (i != PoissonREData::kGroups) throw ConfigError("expected 50 rows in " + path);
  return data;
}

Eigen::VectorXd poisson_prior_draw(const PoissonREData& data, Rng& rng) {
  Eigen::VectorXd s(PoissonREData::dim());
  s(0) = PoissonREData::kPriorSdMu * rng.normal();
  for (int i = 1; i < s.size(); ++i) s(i) = s(0) + data.sigma_eta * rng.normal();
  return s;
}

// ---------------------------------------------------------------------------
// TargetModel

TargetModel TargetModel::product(ProductFactor factor, int n) {
  if (n < 1) throw ConfigError("dimension must be positive");
  return TargetModel(n, std::make_shared<const ProductFactor>(std::move(factor)));
}

TargetModel TargetModel::correlated_gaussian(CovSpec cov) {
  const int n = cov.dim();
  return TargetModel(n, std::make_shared<const CovSpec>(std::move(cov)));
}

TargetModel TargetModel::poisson_re(PoissonREData data) {
  for (int i = 0; i < data.y.rows(); ++i) {
    for (int j = 0; j < data.y.cols(); ++j) {
      if (data.y(i, j) < 0) throw ConfigError("Poisson counts must be non-negative");
    }
  }
  return TargetModel(PoissonREData::dim(), std::make_shared<const PoissonREData>(std::move(data)));
}

TargetModel::Kind TargetModel::kind() const { return static_cast<Kind>(impl_.index()); }

std::string TargetModel::describe() const {
  std::ostringstream os;
  if (const auto* f = factor()) {
    os << "product(" << f->name << ", n=" << dim_ << ")";
  } else if (const auto* c = covariance()) {
    os << (c->structure() == CovStructure::ar1 ? "ar1" : "equicorrelated") << "(rho=" << c->rho()
       << ", n=" << dim_ << ")";
  } else {
    os << "poisson_re(sigma_eta=" << poisson_data()->sigma_eta << ")";
  }
  return os.str();
}

const ProductFactor* TargetModel::factor() const {
  const auto* p = std::get_if<std::shared_ptr<const ProductFactor>>(&impl_);
  return p ? p->get() : nullptr;
}
const CovSpec* TargetModel::covariance() const {
  const auto* p = std::get_if<std::shared_ptr<const CovSpec>>(&impl_);
  return p ? p->get() : nullptr;
}
const PoissonREData* TargetModel::poisson_data() const {
  const auto* p = std::get_if<std::shared_ptr<const PoissonREData>>(&impl_);
  return p ? p->get() : nullptr;
}

void TargetModel::evaluate(const Eigen::VectorXd& x, EvaluatedPoint& out) const {
  if (x.size() != dim_) throw ConfigError("state dimension mismatch");
  if (&out.x != &x) out.x = x;
  out.clamped = false;
  if (const auto* f = factor(); f && f->standard_gaussian) {
    out.gradient = -x;
    out.log_density = -0.5 * x.squaredNorm();
  } else if (f) {
    out.gradient.resize(dim_);
    double lp = 0.0;
    for (int i = 0; i < dim_; ++i) {
      lp += f->phi(x(i));
      out.gradient(i) = f->dphi(x(i));
    }
    out.log_density = lp;
  } else if (const auto* c = covariance()) {
    out.gradient = -c->apply_precision(x);
    out.log_density = 0.5 * x.dot(out.gradient);
  } else {
    auto ev = poisson_logpost_grad(*poisson_data(), x);
    out.log_density = ev.log_posterior;
    out.gradient = std::move(ev.gradient);
    out.clamped = ev.clamped;
  }
}

EvaluatedPoint TargetModel::evaluate(const Eigen::VectorXd& x) const {
  EvaluatedPoint p;
  evaluate(x, p);
  return p;
}

double TargetModel::log_density(const Eigen::VectorXd& x) const { return evaluate(x).log_density; }

Eigen::VectorXd TargetModel::gradient(const Eigen::VectorXd& x) const { return evaluate(x).gradient; }

void TargetModel::sample_into(Rng& rng, Eigen::VectorXd& out) const {
  out.resize(dim_);
  if (const auto* f = factor(); f && f->standard_gaussian) {
    for (int i = 0; i < dim_; ++i) out(i) = rng.normal();
  } else if (f) {
    for (int i = 0; i < dim_; ++i) out(i) = f->sample(rng);
  } else if (const auto* c = covariance()) {
    for (int i = 0; i < dim_; ++i) out(i) = rng.normal();
    out = c->apply_cholesky(out);
  } else {
    throw ConfigError("no exact sampler for the Poisson random-effects posterior");
  }
}

Eigen::VectorXd TargetModel::sample(Rng& rng) const {
  Eigen::VectorXd out;
  sample_into(rng, out);
  return out;
}

Eigen::VectorXd sample_target(const TargetModel& model, std::uint64_t seed) {
  Rng rng(seed);
  return model.sample(rng);
}

}  // namespace lbmh
