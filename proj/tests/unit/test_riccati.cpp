#include <doctest.h>

#include <cmath>

#include "cogmask/riccati.hpp"
#include "cogmask/rng.hpp"

using namespace cogmask;

namespace {

LinearGaussianSystem scalar_system(double a, double q, double r_inv) {
  LinearGaussianSystem sys;
  sys.A = Eigen::MatrixXd::Constant(1, 1, a);
  sys.C = Eigen::MatrixXd::Identity(1, 1);
  sys.state_noise = {q};
  sys.obs_precision = {r_inv};
  return sys;
}

LinearGaussianSystem random_stable_system(Rng& rng, int X) {
  LinearGaussianSystem sys;
  sys.A = Eigen::MatrixXd::Zero(X, X);
  for (int i = 0; i < X; ++i)
    for (int j = 0; j < X; ++j) sys.A(i, j) = rng.uniform(-0.5, 0.5);
  sys.A *= 0.9 / std::max(1e-9, spectral_radius(sys.A));
  sys.C = Eigen::MatrixXd::Identity(X, X);
  sys.state_noise.assign(X, 0.0);
  sys.obs_precision.assign(X, 0.0);
  for (int i = 0; i < X; ++i) {
    sys.state_noise[i] = rng.uniform(0.2, 2.0);
    sys.obs_precision[i] = rng.uniform(0.2, 2.0);
  }
  return sys;
}

}  // namespace

TEST_CASE("memoryless dynamics keep the state noise covariance") {
  const Eigen::MatrixXd s = are_solve(scalar_system(0.0, 1.7, 1.0));
  CHECK(s(0, 0) == doctest::Approx(1.7).epsilon(1e-10));
}

TEST_CASE("scalar fixed point matches the quadratic root") {
  // sigma = a^2 sigma r / (sigma + r) + q with a=0.9, q=r=1
  const Eigen::MatrixXd s = are_solve(scalar_system(0.9, 1.0, 1.0));
  const double root = (0.81 + std::sqrt(0.81 * 0.81 + 4.0)) / 2.0;
  CHECK(std::abs(s(0, 0) - root) <= 1e-10);
}

TEST_CASE("solution is a fixed point to tight tolerance") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const LinearGaussianSystem sys = random_stable_system(rng, 2 + rep % 3);
    const Eigen::MatrixXd s = are_solve(sys);
    CHECK(riccati_residual(sys, s) <= 1e-10);
    // symmetric positive semidefinite output
    CHECK((s - s.transpose()).norm() <= 1e-12);
    const Eigen::VectorXd eig = s.selfadjointView<Eigen::Lower>().eigenvalues();
    for (int i = 0; i < eig.size(); ++i) CHECK(eig(i) >= -1e-12);
  }
}

TEST_CASE("finer sensing never hurts the asymptotic precision") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    LinearGaussianSystem sys = random_stable_system(rng, 2);
    const double before = are_solve(sys).inverse().trace();
    const int idx = rep % 2;
    sys.obs_precision[idx] *= rng.uniform(1.5, 4.0);
    const double after = are_solve(sys).inverse().trace();
    CHECK(after >= before - 1e-9);
  }
}

TEST_CASE("existence conditions are enforced") {
  LinearGaussianSystem sys = scalar_system(1.1, 1.0, 1.0);
  sys.C = Eigen::MatrixXd::Zero(1, 1);
  sys.obs_precision = {1.0};
  CHECK_THROWS_AS(are_solve(sys), std::invalid_argument);  // undetectable unstable mode
  LinearGaussianSystem bad = scalar_system(0.5, 1.0, 1.0);
  bad.state_noise = {-1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("predicted covariance limits") {
  SUBCASE("stable scalar geometric sum") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd s = predicted_covariance_limit(A, Q);
    CHECK(s(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("unstable dynamics are rejected with guidance toward finite horizons") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 1.01);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
    CHECK_THROWS_WITH_AS(predicted_covariance_limit(A, Q),
                         doctest::Contains("finite-horizon"), std::invalid_argument);
    // the finite mode still works
    const Eigen::MatrixXd s = predicted_covariance_finite(A, Q, Q, 3);
    CHECK(s(0, 0) > 1.0);
  }
  SUBCASE("zero horizon returns the initial covariance") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 0.7);
    const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(1, 1);
    const Eigen::MatrixXd s0 = Eigen::MatrixXd::Constant(1, 1, 2.5);
    CHECK(predicted_covariance_finite(A, Q, s0, 0)(0, 0) == doctest::Approx(2.5));
  }
}
