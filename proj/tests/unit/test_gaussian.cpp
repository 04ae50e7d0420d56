#include "doctest.h"

#include <cmath>
#include <random>

#include "j3s/error.hpp"
#include "j3s/gaussian.hpp"
#include "support/oracles.hpp"

using namespace j3s;

namespace {

FeatureMatrix fm(const Eigen::MatrixXd& m, std::string id = "s") {
  return FeatureMatrix{m, 0, std::move(id)};
}

/// Per-eigenvalue regularized likelihood: log l + delta / l + a (-log l - 1 + l).
double eigen_objective(double l, double delta, double a) {
  return std::log(l) + delta / l + a * (-std::log(l) - 1.0 + l);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("hellinger_map") {
  Eigen::MatrixXd x(2, 2);
  x << 4, 9, 0, 1;
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 3, 0, 1;
  CHECK(hellinger_map(fm(x)).data == expected);
  CHECK(hellinger_map(fm(Eigen::MatrixXd::Zero(3, 4))).data == Eigen::MatrixXd::Zero(3, 4));
  CHECK(hellinger_map(fm(x), false).data == x);

  x(1, 0) = -1.0;
  try {
    hellinger_map(fm(x, "img7"));
    FAIL("expected NegativeFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeFeature);
    CHECK(std::string(e.what()).find("img7") != std::string::npos);
    CHECK(std::string(e.what()).find("(1,0)") != std::string::npos);
  }
  CHECK_NOTHROW(hellinger_map(fm(x), false));
}

TEST_CASE("gaussian_fit examples") {
  Eigen::MatrixXd same(3, 2);
  same << 1, 1, 2, 2, 3, 3;
  const GaussianFit a = gaussian_fit(fm(same));
  CHECK(a.mean == Eigen::Vector3d(1, 2, 3));
  CHECK(a.cov.matrix().norm() == 0.0);

  Eigen::MatrixXd pm(1, 2);
  pm << 1, -1;
  const GaussianFit b = gaussian_fit(fm(pm));
  CHECK(b.mean(0) == 0.0);
  CHECK(b.cov(0, 0) == doctest::Approx(1.0));

  CHECK(code_of([] { gaussian_fit(fm(Eigen::MatrixXd::Ones(3, 1))); }) == ErrorCode::TooFewColumns);
}

TEST_CASE("gaussian_fit matches the direct outer-product sum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = testing::random_matrix(rng, 4, 20);
    const GaussianFit fit = gaussian_fit(fm(x));
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(4);
    for (int k = 0; k < 20; ++k) mu += x.col(k);
    mu /= 20.0;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(4, 4);
    for (int k = 0; k < 20; ++k) c += (x.col(k) - mu) * (x.col(k) - mu).transpose();
    c /= 20.0;
    CHECK((fit.mean - mu).norm() <= 1e-12);
    CHECK((fit.cov.matrix() - c).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sym_eig(fit.cov).values.minCoeff() >= -1e-10);
  }
}

TEST_CASE("robust_covariance closed form") {
  const SymMatrix id = robust_covariance(SymMatrix::identity(3), 0.5);
  CHECK((id.matrix() - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-14);

  CHECK(shrink_eigenvalue(0.0, 0.3) == 0.0);
  const SymMatrix zero = robust_covariance(SymMatrix::zero(2), 0.3);
  CHECK(zero.matrix().norm() == 0.0);

  CHECK(code_of([] { robust_covariance(SymMatrix::identity(2), 0.0); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { robust_covariance(SymMatrix::identity(2), 1.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("robust_covariance eigenvalues solve the quadratic and minimize the objective") {
  std::mt19937_64 rng(8);
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (int trial = 0; trial < 10; ++trial) {
      const SymMatrix c(testing::random_psd(rng, 3, 3));
      const EigPair in = sym_eig(c);
      const EigPair out = sym_eig(robust_covariance(c, a));
      for (int k = 0; k < 3; ++k) {
        const double delta = in.values(k);
        const double l = out.values(k);
        CHECK(std::abs(a * l * l + (1 - a) * l - delta) <= 1e-10 * std::max(1.0, delta));
        const double l_star = testing::golden_section(
            [&](double t) { return eigen_objective(t, delta, a); }, 1e-12, 10.0 * (1.0 + delta / a));
        CHECK(std::abs(l - l_star) <= 1e-6);
      }
    }
  }
}

TEST_CASE("robust_covariance is monotone in the input eigenvalue") {
  for (double a : {0.1, 0.5, 0.9}) {
    double prev = -1.0;
    for (double delta = 0.0; delta < 50.0; delta += 0.37) {
      const double l = shrink_eigenvalue(delta, a);
      CHECK(l >= prev);
      prev = l;
    }
  }
}

TEST_CASE("embed_spd examples") {
  const SymMatrix p = embed_spd(Eigen::VectorXd::Zero(3), SymMatrix::identity(3), 1.0);
  CHECK(p.matrix() == Eigen::MatrixXd::Identity(4, 4));

  Eigen::MatrixXd s(1, 1);
  s << 3;
  const SymMatrix q = embed_spd(Eigen::VectorXd::Constant(1, 2.0), SymMatrix(s), 1.0);
  Eigen::Matrix2d expected;
  expected << 7, 2, 2, 1;
  CHECK(q.matrix() == expected);
  CHECK(q.matrix().determinant() == doctest::Approx(3.0));
}

TEST_CASE("embed_spd of SPD input is SPD with unit corner") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> beta(0.1, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 6;
    const SymMatrix s(testing::random_psd(rng, d, d) + 0.1 * Eigen::MatrixXd::Identity(d, d));
    const SymMatrix p = embed_spd(testing::random_vector(rng, d), s, beta(rng));
    CHECK(p(d, d) == 1.0);
    CHECK(sym_eig(p).values.minCoeff() > 0.0);
  }
}

TEST_CASE("build_descriptor runs the full chain") {
  GaussianConfig cfg;
  cfg.use_hellinger = false;

  // d = 1, two equal columns: mu = 4, C = 0, robust cov = 0, P = [[16,4],[4,1]] (singular, floored).
  Eigen::MatrixXd x(1, 2);
  x << 4, 4;
  const GaussianDescriptor g = build_descriptor(fm(x), cfg);
  CHECK(g.mean(0) == 4.0);
  CHECK(g.robust_cov(0, 0) == 0.0);
  Eigen::Matrix2d p;
  p << 16, 4, 4, 1;
  CHECK(g.embedding.matrix() == p);
  CHECK(g.stat_vector.size() == 3);
  CHECK(g.stat_vector == triu_vec(spd_logm(g.embedding, cfg.eig_floor)));

  std::mt19937_64 rng(4);
  const Eigen::MatrixXd r = testing::random_matrix(rng, 6, 30).cwiseAbs();
  cfg.use_hellinger = true;
  const GaussianDescriptor h = build_descriptor(fm(r), cfg);
  CHECK(h.stat_vector.size() == 28);
  CHECK(sym_eig(h.embedding).values.minCoeff() > 0.0);

  // Identical non-negative columns: degenerate covariance path completes.
  const Eigen::MatrixXd flat = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0).replicate(1, 8);
  const GaussianDescriptor f = build_descriptor(fm(flat), cfg);
  CHECK(f.robust_cov.matrix().norm() <= 1e-12);
  CHECK(f.stat_vector.allFinite());
}

TEST_CASE("build_descriptor is bit-for-bit deterministic") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd r = testing::random_matrix(rng, 7, 25).cwiseAbs();
  const GaussianConfig cfg;
  const Eigen::VectorXd a = build_descriptor(fm(r), cfg).stat_vector;
  const Eigen::VectorXd b = build_descriptor(fm(r), cfg).stat_vector;
  CHECK(a == b);
}

TEST_CASE("GaussianConfig validation") {
  GaussianConfig cfg;
  cfg.beta = 0.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
  cfg.beta = 1.0;
  cfg.cov_shrinkage = 1.5;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
}

}  // TEST_SUITE
