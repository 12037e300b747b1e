#include "lbmh/engine.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>

#include "lbmh/error.hpp"

namespace lbmh {

MHLogRatio log_mh_rho(const LBProposal& prop, const EvaluatedPoint& x, const EvaluatedPoint& y,
                      bool keep_terms) {
  MHLogRatio out;
  const double target_diff = y.log_density - x.log_density;
  if (prop.path() == ProposalPath::rwm) {
    out.rho = target_diff;
  } else {
    const auto& g = prop.balancing();
    const auto& mu = prop.noise();
    const Eigen::Index n = x.x.size();
    if (keep_terms) out.per_coord_terms.resize(n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = prop.scale(i);
      const double bx = x.gradient(i);
      const double by = y.gradient(i);
      // reverse move weight and forward normaliser, minus the forward move
      // weight and reverse normaliser
      const double reverse = g.b(by * (x.x(i) - y.x(i))) + log_normalizer(g, mu, bx * s);
      const double forward = g.b(bx * (y.x(i) - x.x(i))) + log_normalizer(g, mu, by * s);
      const double term = reverse - forward;
      if (keep_terms) out.per_coord_terms(i) = term;
      sum += term;
    }
    out.rho = target_diff + sum;
  }
  if (!std::isfinite(out.rho)) {
    out.finite = false;
    out.rho = -std::numeric_limits<double>::infinity();
  }
  return out;
}

StepResult mh_step(const LBProposal& prop, const TargetModel& model, EvaluatedPoint& current,
                   EvaluatedPoint& scratch, Rng& rng) {
  propose_into(prop, model, current, scratch, rng);
  const auto r = log_mh_rho(prop, current, scratch);
  StepResult res;
  res.rho = r.rho;
  res.rho_finite = r.finite;
  const double capped = std::min(0.0, r.rho);
  res.accept_prob = std::exp(capped);
  res.accepted = std::log(rng.uniform()) < capped;
  if (res.accepted) std::swap(current, scratch);
  return res;
}

AdaptState AdaptState::start(int dim, double sigma, double target_acc) {
  AdaptState a;
  a.log_scale = std::log(sigma);
  a.running_mean = Eigen::VectorXd::Zero(dim);
  a.running_var = Eigen::VectorXd::Ones(dim);
  a.target_acc = target_acc;
  return a;
}

double AdaptState::learning_rate() const { return std::pow(static_cast<double>(std::max(t, 1L)), -decay); }

void write_chain_csv_header(std::ostream& os, const std::vector<int>& coords) {
  os << "iter";
  for (std::size_t k = 0; k < coords.size(); ++k) os << ",coord_" << k;
  os << ",accepted,rho\n";
}

ChainOutput run_chain(const LBProposal& prop_in, const TargetModel& model, long n_iters,
                      const Eigen::VectorXd& init, Rng& rng, std::optional<AdaptState> adapt,
                      const ChainOptions& options) {
  if (n_iters < 1) throw ConfigError("run_chain needs at least one iteration");
  if (init.size() != model.dim()) throw ConfigError("initial state has the wrong dimension");
  if (adapt && !(adapt->decay > 0.5 && adapt->decay <= 1.0)) {
    throw ConfigError("adaptation decay must lie in (0.5, 1]");
  }
  const auto noise_kind = prop_in.noise().kind();
  if (noise_kind == NoiseKind::rademacher || noise_kind == NoiseKind::three_point) {
    std::cerr << "warning: " << prop_in.noise().name()
              << " noise does not give an irreducible chain on R^n\n";
  }

  LBProposal prop = prop_in;
  const int dim = model.dim();
  std::vector<int> coords = options.record_coords;
  if (coords.empty()) {
    coords.resize(dim);
    for (int i = 0; i < dim; ++i) coords[i] = i;
  }
  const int thin = std::max(1, options.thin);
  const long burn = static_cast<long>(std::floor(options.burn_in_fraction * n_iters));
  const long adapt_until = static_cast<long>(std::floor(options.adapt_fraction * n_iters));
  const long retained = (n_iters - burn + thin - 1) / thin;

  ChainOutput out;
  out.samples.resize(retained, static_cast<Eigen::Index>(coords.size()));

  if (adapt) {
    prop.set_sigma(std::exp(adapt->log_scale));
    if (adapt->t > adapt->warm_start) prop.set_precond(adapt->running_var.cwiseSqrt());
  }
  if (options.csv) write_chain_csv_header(*options.csv, options.csv_coords);

  EvaluatedPoint current = model.evaluate(init);
  EvaluatedPoint scratch;
  Eigen::VectorXd welford_mean = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd welford_m2 = Eigen::VectorXd::Zero(dim);
  double acc_sum = 0.0, jump_sum = 0.0;
  long counted = 0, row = 0;

  for (long it = 0; it < n_iters; ++it) {
    const double before = current.x(0);
    const StepResult step = mh_step(prop, model, current, scratch, rng);
    ++out.iterations;

    if (!current.x.allFinite() || current.x.cwiseAbs().maxCoeff() > options.divergence_bound) {
      out.diverged = true;
      out.diagnostic = "state left the bound " + std::to_string(options.divergence_bound) +
                       " at iteration " + std::to_string(it);
      break;
    }

    if (adapt && it < adapt_until) {
      AdaptState& a = *adapt;
      ++a.t;
      const double rate = a.learning_rate();
      a.log_scale += rate * (step.accept_prob - a.target_acc);
      if (a.t <= a.warm_start) {
        const double k = static_cast<double>(a.t);
        const Eigen::VectorXd delta = current.x - welford_mean;
        welford_mean += delta / k;
        welford_m2 += delta.cwiseProduct(current.x - welford_mean);
        if (a.t == a.warm_start) {
          a.running_mean = welford_mean;
          for (int i = 0; i < dim; ++i) {
            const double v = welford_m2(i) / std::max(1.0, k - 1.0);
            a.running_var(i) = v > 0.0 ? v : 1.0;
          }
        }
      } else {
        a.running_mean += rate * (current.x - a.running_mean);
        a.running_var += rate * ((current.x - a.running_mean).array().square().matrix() - a.running_var);
        a.running_var = a.running_var.cwiseMax(1e-300);
        prop.set_precond(a.running_var.cwiseSqrt());
      }
      prop.set_sigma(std::exp(a.log_scale));
    }

    if (it >= burn) {
      acc_sum += step.accept_prob;
      const double jump = current.x(0) - before;
      jump_sum += jump * jump;
      ++counted;
      if ((it - burn) % thin == 0 && row < retained) {
        for (std::size_t k = 0; k < coords.size(); ++k) out.samples(row, static_cast<Eigen::Index>(k)) = current.x(coords[k]);
        ++row;
      }
    }
    if (options.csv) {
      auto& os = *options.csv;
      os << it;
      for (int c : options.csv_coords) os << ',' << current.x(c);
      os << ',' << (step.accepted ? 1 : 0) << ',' << step.rho << '\n';
    }
  }

  out.samples.conservativeResize(row, out.samples.cols());
  out.acc_rate = counted ? acc_sum / static_cast<double>(counted) : 0.0;
  out.esjd = counted ? jump_sum / static_cast<double>(counted) : 0.0;
  if (options.compute_ess && !out.diverged && row >= 100) {
    out.ess.resize(out.samples.cols());
    for (Eigen::Index k = 0; k < out.samples.cols(); ++k) out.ess(k) = ess(out.samples.col(k));
  }
  out.adapt = adapt;
  out.final_state = current.x;
  out.final_sigma = prop.sigma();
  return out;
}

Eigen::VectorXd autocorrelation(const Eigen::Ref<const Eigen::VectorXd>& series, Eigen::Index max_lag) {
  const Eigen::Index n = series.size();
  Eigen::Index m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<double> padded(static_cast<std::size_t>(m), 0.0);
  const double mean = series.mean();
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = series(i) - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);
  for (auto& c : freq) c = std::complex<double>(std::norm(c), 0.0);
  std::vector<double> acov;
  fft.inv(acov, freq);

  max_lag = std::min(max_lag, n - 1);
  Eigen::VectorXd rho(max_lag + 1);
  const double c0 = acov[0];
  for (Eigen::Index k = 0; k <= max_lag; ++k) rho(k) = c0 > 0.0 ? acov[static_cast<std::size_t>(k)] / c0 : 0.0;
  return rho;
}

double ess(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const Eigen::Index n = series.size();
  if (n < 100) throw ConfigError("ESS needs a series of length >= 100");
  const double mean = series.mean();
  if ((series.array() - mean).abs().maxCoeff() == 0.0) return 1.0;

  const Eigen::VectorXd rho = autocorrelation(series, n - 1);
  // Geyer: pair sums Gamma_m = rho_{2m} + rho_{2m+1}, truncated at the first
  // non-positive pair and forced to be non-increasing.
  double tau = -1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < rho.size(); ++m) {
    double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return std::clamp(static_cast<double>(n) / tau, 1.0, static_cast<double>(n));
}

}  // namespace lbmh
