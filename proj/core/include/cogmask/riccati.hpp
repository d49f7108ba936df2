#pragma once

#include <Eigen/Dense>
#include <optional>

#include "cogmask/vecmath.hpp"

namespace cogmask {

/// Linear Gaussian tracking model with diagonal noise parametrization:
/// state noise covariance Q = diag(state_noise), observation noise
/// covariance R = diag(1 / obs_precision).
struct LinearGaussianSystem {
  Eigen::MatrixXd A;            // state transition, X x X
  Eigen::MatrixXd C;            // observation, Y x X
  Vec state_noise;              // diagonal of Q, positive
  Vec obs_precision;            // diagonal of R^{-1}, positive
  Eigen::MatrixXd initial_covariance;  // defaults to Q when empty

  Eigen::MatrixXd Q() const;
  Eigen::MatrixXd R() const;

  /// Throws unless [A, C] is detectable and [A, sqrt(Q)] is stabilizable
  /// (PBH rank tests), the existence conditions for the steady-state
  /// predicted covariance.
  void validate() const;
};

/// Steady-state predicted covariance: fixed point of
///   Sigma -> A (Sigma - Sigma C' (C Sigma C' + R)^{-1} C Sigma) A' + Q
/// by fixed-point iteration from Sigma = Q. Throws when the residual target
/// is not reached within max_iter.
Eigen::MatrixXd are_solve(const LinearGaussianSystem& sys, double tol = 1e-11,
                          int max_iter = 200000);

/// Frobenius norm of the fixed-point defect at Sigma.
double riccati_residual(const LinearGaussianSystem& sys, const Eigen::MatrixXd& sigma);

/// Solution of Sigma = A Sigma A' + Q (the n -> infinity predicted
/// covariance); requires spectral radius of A below one.
Eigen::MatrixXd predicted_covariance_limit(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// n-step predicted covariance A^n S0 A'^n + sum_{l<n} A^l Q A'^l.
Eigen::MatrixXd predicted_covariance_finite(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q,
                                            const Eigen::MatrixXd& sigma0, int n);

double spectral_radius(const Eigen::MatrixXd& A);

}  // namespace cogmask
