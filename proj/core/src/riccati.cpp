#include "cogmask/riccati.hpp"

#include <stdexcept>
#include <string>

namespace cogmask {
namespace {

Eigen::MatrixXd riccati_map(const LinearGaussianSystem& sys, const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd R = sys.R();
  const Eigen::MatrixXd innov = sys.C * sigma * sys.C.transpose() + R;
  const Eigen::MatrixXd corr = sigma * sys.C.transpose() * innov.inverse() * sys.C * sigma;
  return sys.A * (sigma - corr) * sys.A.transpose() + sys.Q();
}

// PBH test: rank [A - lambda I; C] (or [A - lambda I, B]) is full for every
// eigenvalue on or outside the unit circle.
bool pbh_full_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& other, bool stack_rows) {
  const Eigen::VectorXcd eig = A.eigenvalues();
  const auto X = A.rows();
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    if (std::abs(eig[k]) < 1.0 - 1e-12) continue;
    Eigen::MatrixXcd M;
    if (stack_rows) {
      M.resize(X + other.rows(), X);
      M.topRows(X) = A.cast<std::complex<double>>() -
                     eig[k] * Eigen::MatrixXcd::Identity(X, X);
      M.bottomRows(other.rows()) = other.cast<std::complex<double>>();
    } else {
      M.resize(X, X + other.cols());
      M.leftCols(X) = A.cast<std::complex<double>>() -
                      eig[k] * Eigen::MatrixXcd::Identity(X, X);
      M.rightCols(other.cols()) = other.cast<std::complex<double>>();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    if (qr.rank() < X) return false;
  }
  return true;
}

}  // namespace

Eigen::MatrixXd LinearGaussianSystem::Q() const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(A.rows(), A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) q(i, i) = state_noise[i];
  return q;
}

Eigen::MatrixXd LinearGaussianSystem::R() const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(C.rows(), C.rows());
  for (Eigen::Index i = 0; i < C.rows(); ++i) r(i, i) = 1.0 / obs_precision[i];
  return r;
}

void LinearGaussianSystem::validate() const {
  const auto X = A.rows();
  if (A.cols() != X) throw std::invalid_argument("system: A must be square");
  if (C.cols() != X) throw std::invalid_argument("system: C column count mismatch");
  if (static_cast<Eigen::Index>(state_noise.size()) != X)
    throw std::invalid_argument("system: state noise diagonal size mismatch");
  if (static_cast<Eigen::Index>(obs_precision.size()) != C.rows())
    throw std::invalid_argument("system: observation precision size mismatch");
  for (double v : state_noise)
    if (!(v > 0.0)) throw std::invalid_argument("system: state noise must be positive");
  for (double v : obs_precision)
    if (!(v > 0.0)) throw std::invalid_argument("system: observation precision must be positive");
  if (!pbh_full_rank(A, C, true))
    throw std::invalid_argument("system: [A, C] is not detectable");
  Eigen::MatrixXd sqrtQ = Eigen::MatrixXd::Zero(X, X);
  for (Eigen::Index i = 0; i < X; ++i) sqrtQ(i, i) = std::sqrt(state_noise[i]);
  if (!pbh_full_rank(A, sqrtQ, false))
    throw std::invalid_argument("system: [A, sqrt(Q)] is not stabilizable");
}

double riccati_residual(const LinearGaussianSystem& sys, const Eigen::MatrixXd& sigma) {
  return (riccati_map(sys, sigma) - sigma).norm();
}

Eigen::MatrixXd are_solve(const LinearGaussianSystem& sys, double tol, int max_iter) {
  sys.validate();
  Eigen::MatrixXd sigma = sys.Q();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXd next = riccati_map(sys, sigma);
    next = 0.5 * (next + next.transpose()).eval();  // keep symmetric
    const double defect = (next - sigma).norm();
    sigma = std::move(next);
    if (defect <= tol) {
      const double res = riccati_residual(sys, sigma);
      if (res <= 10.0 * tol) return sigma;
    }
  }
  throw std::runtime_error("are_solve: residual " +
                           std::to_string(riccati_residual(sys, sigma)) +
                           " not below tolerance after max iterations");
}

double spectral_radius(const Eigen::MatrixXd& A) {
  const Eigen::VectorXcd eig = A.eigenvalues();
  double r = 0.0;
  for (Eigen::Index k = 0; k < eig.size(); ++k) r = std::max(r, std::abs(eig[k]));
  return r;
}

Eigen::MatrixXd predicted_covariance_limit(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  if (spectral_radius(A) >= 1.0 - 1e-12)
    throw std::invalid_argument(
        "predicted_covariance_limit: unstable dynamics, use the finite-horizon mode");
  const auto X = A.rows();
  // vec(S) = (I - A (x) A)^{-1} vec(Q)
  Eigen::MatrixXd kron(X * X, X * X);
  for (Eigen::Index i = 0; i < X; ++i)
    for (Eigen::Index j = 0; j < X; ++j)
      kron.block(i * X, j * X, X, X) = A(i, j) * A;
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(X * X, X * X) - kron;
  Eigen::VectorXd q(X * X);
  for (Eigen::Index i = 0; i < X; ++i)
    for (Eigen::Index j = 0; j < X; ++j) q(i * X + j) = Q(i, j);
  const Eigen::VectorXd s = lhs.partialPivLu().solve(q);
  Eigen::MatrixXd S(X, X);
  for (Eigen::Index i = 0; i < X; ++i)
    for (Eigen::Index j = 0; j < X; ++j) S(i, j) = s(i * X + j);
  return 0.5 * (S + S.transpose());
}

Eigen::MatrixXd predicted_covariance_finite(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                            const Eigen::MatrixXd& sigma0, int n) {
  if (n < 0) throw std::invalid_argument("predicted_covariance_finite: negative horizon");
  Eigen::MatrixXd S = sigma0;
  for (int k = 0; k < n; ++k) S = (A * S * A.transpose() + Q).eval();
  return S;
}

}  // namespace cogmask
