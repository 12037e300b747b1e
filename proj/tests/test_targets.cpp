#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lbmh/error.hpp"
#include "lbmh/quadrature.hpp"
#include "lbmh/targets.hpp"
#include "oracles.hpp"

using namespace lbmh;

TEST_CASE("adaptive quadrature on finite and infinite ranges") {
  CHECK(integrate([](double x) { return std::exp(-0.5 * x * x); }, -kInf, kInf) ==
        doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, kInf) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
  const auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1.0, 1.0, 1e-14, 30);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, kInf), NumericalError);
}

TEST_CASE("Gauss-Hermite rules are exact for low-degree polynomials") {
  for (int order : {8, 64, 96}) {
    const auto rule = gauss_hermite_rule(order);
    double m0 = 0, m2 = 0, m4 = 0;
    for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
      const double x = rule.nodes(k), w = rule.weights(k);
      m0 += w;
      m2 += w * x * x;
      m4 += w * x * x * x * x;
    }
    CHECK(m0 == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3 * std::sqrt(M_PI) / 4).epsilon(1e-13));
  }
}

TEST_CASE("gaussian factor") {
  const auto f = make_gaussian_factor();
  CHECK(f.d2phi(7.3) == -1.0);
  CHECK(f.d3phi(0.4) == 0.0);
  CHECK(std::exp(f.log_normalizer) == doctest::Approx(2.5066282746310002).epsilon(1e-10));
  CHECK(derivative_check_error(f) < 1e-5);
}

TEST_CASE("hyperbolic factor") {
  const auto f = make_hyperbolic_factor(0.1);
  CHECK(f.dphi(0.0) == 0.0);
  CHECK(f.d3phi(-1.3) == doctest::Approx(-f.d3phi(1.3)).epsilon(1e-15));
  CHECK(f.phi(2.0) < 0.0);
  CHECK(derivative_check_error(f) < 1e-5);
  // integral of exp(-sqrt(d^2 + x^2)) is 2 d K_1(d)
  const double d = std::sqrt(0.1);
  CHECK(std::exp(f.log_normalizer) == doctest::Approx(2.0 * d * std::cyl_bessel_k(1.0, d)).epsilon(1e-9));
  CHECK_THROWS_AS(make_hyperbolic_factor(0.0), ConfigError);
  CHECK_THROWS_AS(make_hyperbolic_factor(-1.0), ConfigError);
}

TEST_CASE("inverse-CDF table tail mass at delta^2 = 0.1") {
  const double d2 = 0.1;
  InverseCdfTable table([d2](double x) { return -std::sqrt(d2 + x * x); }, -40.0, 40.0, 4096);
  CHECK(table.tail_mass() < 1e-12);
  CHECK(table.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(table.cdf(table.quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("exact samplers pass KS against the tabulated CDF") {
  Rng rng(11);
  for (const auto& f : {make_gaussian_factor(), make_hyperbolic_factor(0.1)}) {
    std::vector<double> xs(100000);
    for (auto& x : xs) x = f.sample(rng);
    const oracle::TabulatedCdf cdf([&](double x) { return std::exp(f.phi(x)); }, -45.0, 45.0);
    CHECK_MESSAGE(oracle::ks(xs, cdf) < 0.01, f.name);
  }
}

TEST_CASE("custom factors are validated") {
  CHECK_THROWS_AS(make_custom_factor(
                      "flat", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                      [](double) { return 0.0; }),
                  ConfigError);
  CHECK_THROWS_AS(make_custom_factor(
                      "bad-derivative", [](double x) { return -0.5 * x * x; }, [](double x) { return -2.0 * x; },
                      [](double) { return -1.0; }, [](double) { return 0.0; }),
                  ConfigError);
  const auto quartic = make_custom_factor(
      "quartic", [](double x) { return -0.25 * x * x * x * x; }, [](double x) { return -x * x * x; },
      [](double x) { return -3.0 * x * x; }, [](double x) { return -6.0 * x; });
  Rng rng(3);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = quartic.sample(rng);
  const oracle::TabulatedCdf cdf([](double x) { return std::exp(-0.25 * x * x * x * x); }, -8.0, 8.0);
  CHECK(oracle::ks(xs, cdf) < 0.01);
}

TEST_CASE("covariance structures") {
  for (auto s : {CovStructure::equicorrelated, CovStructure::ar1}) {
    const CovSpec c(7, s, s == CovStructure::ar1 ? 0.9 : 0.6);
    const Eigen::MatrixXd S = c.dense_covariance();
    const Eigen::MatrixXd L = c.dense_cholesky();
    CHECK((L * L.transpose() - S).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((S.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(S).info() == Eigen::Success);
    Rng rng(5);
    Eigen::VectorXd z(7);
    for (int i = 0; i < 7; ++i) z(i) = rng.normal();
    CHECK((c.apply_cholesky(z) - L * z).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((S * c.apply_precision(z) - z).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK(CovSpec(3, CovStructure::ar1, 0.5).dense_covariance()(0, 2) == doctest::Approx(0.25));
  CHECK_THROWS_AS(CovSpec(3, CovStructure::ar1, 1.0), ConfigError);
  CHECK_THROWS_AS(CovSpec(4, CovStructure::equicorrelated, -0.5), ConfigError);
}

TEST_CASE("target gradients agree with finite differences") {
  Rng rng(21);
  const std::vector<TargetModel> models = {
      TargetModel::product(make_hyperbolic_factor(0.1), 6),
      TargetModel::correlated_gaussian(CovSpec(6, CovStructure::ar1, 0.9)),
      TargetModel::correlated_gaussian(CovSpec(6, CovStructure::equicorrelated, 0.5)),
      TargetModel::poisson_re(poisson_generate(2, 1.0))};
  for (const auto& m : models) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd x(m.dim());
      for (int i = 0; i < m.dim(); ++i) x(i) = m.kind() == TargetModel::Kind::poisson_re ? 5.0 + 0.5 * rng.normal() : rng.normal();
      const Eigen::VectorXd g = m.gradient(x);
      for (int i = 0; i < m.dim(); ++i) {
        const double fd = oracle::central_diff(
            [&](double t) {
              Eigen::VectorXd xt = x;
              xt(i) = t;
              return m.log_density(xt);
            },
            x(i), 1e-4);
        CHECK_MESSAGE(std::abs(fd - g(i)) <= 1e-5 * std::max(1.0, std::abs(g(i))), m.describe() << " coord " << i);
      }
    }
  }
}

TEST_CASE("Poisson random-effects data and posterior") {
  const auto data = poisson_generate(1, 1.0);
  CHECK(data.y.rows() == 50);
  CHECK(data.y.cols() == 5);
  CHECK((data.y.array() >= 0).all());
  CHECK(PoissonREData::dim() == 51);
  // frozen from a seeded run of this generator
  CHECK(data.y.cast<double>().mean() == doctest::Approx(303.32).epsilon(1e-12));
  CHECK_THROWS_AS(poisson_generate(1, 0.0), ConfigError);

  PoissonREData zero = data;
  zero.y.setZero();
  zero.sigma_eta = 2.0;
  Eigen::VectorXd state = Eigen::VectorXd::Zero(51);
  auto ev = poisson_logpost_grad(zero, state);
  for (int i = 1; i <= 50; ++i) CHECK(ev.gradient(i) == doctest::Approx(-5.0));
  state.tail(50).setConstant(0.7);
  ev = poisson_logpost_grad(zero, state);
  CHECK(ev.gradient(0) == doctest::Approx(50 * 0.7 / 4.0));

  state.setConstant(800.0);
  CHECK(poisson_logpost_grad(zero, state).clamped);

  const auto path = (std::filesystem::temp_directory_path() / "lbmh_poisson_roundtrip.csv").string();
  write_poisson_csv(data, path);
  const auto back = read_poisson_csv(path, 1.0);
  CHECK(back.y == data.y);
  std::remove(path.c_str());
}

TEST_CASE("sample_target") {
  Rng rng(8);
  const auto prod = TargetModel::product(make_gaussian_factor(), 2);
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd x = prod.sample(rng);
    m2 += x * x.transpose();
  }
  m2 /= draws;
  CHECK((m2 - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 0.02);

  const auto ar = TargetModel::correlated_gaussian(CovSpec(3, CovStructure::ar1, 0.99));
  double s13 = 0, s11 = 0, s33 = 0;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd x = ar.sample(rng);
    s13 += x(0) * x(2);
    s11 += x(0) * x(0);
    s33 += x(2) * x(2);
  }
  CHECK(s13 / std::sqrt(s11 * s33) == doctest::Approx(0.9801).epsilon(0.01 / 0.9801));

  const auto pois = TargetModel::poisson_re(poisson_generate(1, 1.0));
  CHECK_THROWS_AS(sample_target(pois, 1), ConfigError);
  CHECK(sample_target(prod, 4) == sample_target(prod, 4));
}
