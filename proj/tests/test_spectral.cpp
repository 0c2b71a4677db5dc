#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "robreg/rng.hpp"
#include "robreg/spectral.hpp"

using robreg::BoxWeights;
using robreg::PowerOptions;
using robreg::SimplexWeights;
using robreg::VectorSet;

namespace {

VectorSet random_set(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  auto st = robreg::Rng(seed).stream(0);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = st.normal();
  }
  return VectorSet(std::move(z));
}

double dense_top(const VectorSet& zs, const Eigen::VectorXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(zs.second_moment(s));
  return es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("compensated sum is immune to cancellation order") {
  Eigen::VectorXd v(2001);
  v(0) = 1.0;
  for (int i = 1; i <= 1000; ++i) {
    v(2 * i - 1) = 1e-16;
    v(2 * i) = -1e-16;
  }
  CHECK(robreg::compensated_sum(v) == 1.0);

  Eigen::VectorXd w(3);
  w << 1e100, 1.0, -1e100;
  CHECK(robreg::compensated_sum(w) == 1.0);
}

TEST_CASE("weight types expose the cap formula") {
  BoxWeights box{Eigen::VectorXd::Zero(8), 0.2};
  CHECK(box.cap() == doctest::Approx(1.0 / (0.8 * 8)));
  CHECK(robreg::box_feasible(box));

  box.s(3) = box.cap() + 1e-9;
  CHECK_FALSE(robreg::box_feasible(box));

  SimplexWeights simplex{robreg::uniform_weights(10), 0.1};
  CHECK(robreg::simplex_member(simplex));
  simplex.s(0) += 1e-6;
  CHECK_FALSE(robreg::simplex_member(simplex));

  simplex.s = Eigen::VectorXd::Constant(10, 0.1);
  simplex.s(0) = -1e-15;
  simplex.s(1) = 0.2 - 1e-15;
  CHECK_FALSE(robreg::simplex_member(simplex));
}

TEST_CASE("uniform weights sum to one") {
  const Eigen::VectorXd u = robreg::uniform_weights(7);
  CHECK(robreg::compensated_sum(u) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(u.minCoeff() == u.maxCoeff());
}

TEST_CASE("matrix free application matches the dense moment") {
  const VectorSet zs = random_set(6, 3, 101);
  auto st = robreg::Rng(5).stream(1);
  Eigen::VectorXd s(6), v(3);
  for (int i = 0; i < 6; ++i) s(i) = st.uniform();
  for (int j = 0; j < 3; ++j) v(j) = st.normal();

  const Eigen::VectorXd fast = zs.apply_second_moment(s, v);
  const Eigen::VectorXd slow = zs.second_moment(s) * v;
  CHECK((fast - slow).norm() < 1e-12);

  CHECK(zs.apply_second_moment(Eigen::VectorXd::Zero(6), v).norm() == 0.0);
}

TEST_CASE("rank one spectrum is exact") {
  Eigen::MatrixXd z(1, 2);
  z << 3, 4;
  const VectorSet zs(z);
  const auto cert = robreg::lambda_max(zs, Eigen::VectorXd::Ones(1));
  CHECK(cert.lambda == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(std::abs(cert.v(0) * 0.8 - cert.v(1) * 0.6) < 1e-6);
  CHECK(std::abs(cert.v.norm() - 1.0) < 1e-10);
}

TEST_CASE("degenerate isotropic spectrum still certifies") {
  Eigen::MatrixXd z(2, 2);
  z << 1, 0, 0, 1;
  const VectorSet zs(z);
  const auto cert =
      robreg::lambda_max(zs, Eigen::VectorXd::Constant(2, 0.5));
  CHECK(cert.lambda == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(cert.residual <= 1e-6 * std::max(cert.lambda, 1.0));
}

TEST_CASE("power iteration matches a dense eigensolver on random instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const VectorSet zs = random_set(8, 4, 1000 + seed);
    auto st = robreg::Rng(seed).stream(2);
    Eigen::VectorXd s(8);
    for (int i = 0; i < 8; ++i) s(i) = st.uniform();

    PowerOptions opts;
    opts.seed = seed;
    const auto cert = robreg::lambda_max(zs, s, opts);
    const double exact = dense_top(zs, s);
    CHECK(cert.lambda <= exact * (1.0 + 1e-12));
    CHECK(cert.lambda >= exact * (1.0 - 1e-5));
  }
}

TEST_CASE("scale equivariance and monotonicity") {
  const VectorSet zs = random_set(10, 3, 77);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(10, 0.1);

  PowerOptions opts;
  opts.seed = 4;
  const double base = robreg::lambda_max(zs, s, opts).lambda;
  const double scaled = robreg::lambda_max(zs, 3.0 * s, opts).lambda;
  CHECK(scaled == doctest::Approx(3.0 * base).epsilon(1e-5));

  Eigen::VectorXd bigger = s;
  bigger(4) += 0.5;
  const double grown = robreg::lambda_max(zs, bigger, opts).lambda;
  CHECK(grown >= base * (1.0 - 1e-6));
}

TEST_CASE("deterministic given the seed") {
  const VectorSet zs = random_set(12, 4, 3);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(12, 1.0 / 12);
  PowerOptions opts;
  opts.seed = 9;
  const auto a = robreg::lambda_max(zs, s, opts);
  const auto b = robreg::lambda_max(zs, s, opts);
  CHECK(a.lambda == b.lambda);
  CHECK(a.v == b.v);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("iteration cap either throws with the best iterate or returns it") {
  // Two nearly tied eigenvalues force slow convergence at a tiny tolerance.
  Eigen::MatrixXd z(2, 2);
  z << 1.0, 0.0, 0.0, 1.0 - 1e-10;
  const VectorSet zs(z);

  PowerOptions opts;
  opts.tol = 1e-14;
  opts.max_iterations = 3;
  opts.seed = 11;
  CHECK_THROWS_AS(robreg::lambda_max(zs, Eigen::VectorXd::Ones(2), opts),
                  robreg::ConvergenceError);
  try {
    robreg::lambda_max(zs, Eigen::VectorXd::Ones(2), opts);
  } catch (const robreg::ConvergenceError& err) {
    CHECK(err.best_iterate.lambda > 0.9);
  }

  opts.allow_partial = true;
  const auto cert = robreg::lambda_max(zs, Eigen::VectorXd::Ones(2), opts);
  CHECK(cert.lambda > 0.9);
  CHECK(cert.lambda <= 1.0 + 1e-12);
}

TEST_CASE("warm start converges immediately on the right direction") {
  const VectorSet zs = random_set(20, 5, 55);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(20, 0.05);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(zs.second_moment(s));
  const Eigen::VectorXd top = es.eigenvectors().col(4);

  PowerOptions opts;
  opts.seed = 1;
  opts.warm_start = &top;
  const auto warm = robreg::lambda_max(zs, s, opts);
  PowerOptions cold_opts;
  cold_opts.seed = 1;
  const auto cold = robreg::lambda_max(zs, s, cold_opts);
  CHECK(warm.iterations <= cold.iterations);
  CHECK(warm.lambda == doctest::Approx(cold.lambda).epsilon(1e-8));
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(VectorSet(Eigen::MatrixXd()), std::invalid_argument);
  Eigen::MatrixXd bad(1, 2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(VectorSet(bad), std::invalid_argument);

  const VectorSet zs = random_set(4, 2, 1);
  CHECK_THROWS_AS(zs.apply_second_moment(Eigen::VectorXd::Zero(3),
                                         Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

}  // TEST_SUITE
