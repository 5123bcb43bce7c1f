#pragma once

// FastICA baseline: covariance whitening followed by the symmetric
// fixed-point iteration with the log-cosh (tanh) contrast.

#include "varsparse/matrix.hpp"

#include <cstdint>

namespace varsparse {

struct IcaConfig {
  int max_iter = 500;
  double tol = 1e-6;
  std::uint64_t seed = 0;
};

struct IcaModel {
  Vector mean;      ///< m
  Matrix whitening; ///< m x d, centered data times this has identity covariance
  Matrix rotation;  ///< d x d orthogonal, one unmixing direction per row
  int components = 0;
  int iterations = 0;
  bool converged = false;
};

/// Throws Precondition when n <= d or m < d, Numerical when the covariance is
/// rank deficient. Non-convergence leaves converged == false.
IcaModel fit_fastica(const Matrix& x, int d, const IcaConfig& config = {});

/// (x - mean) * whitening * rotation^T
Matrix transform(const IcaModel& model, const Matrix& x);

/// Inverse of transform when d == m.
Matrix inverse_transform(const IcaModel& model, const Matrix& s);

}  // namespace varsparse
