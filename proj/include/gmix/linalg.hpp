#pragma once

#include <Eigen/Dense>

namespace gmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Lower Cholesky factor L with L Lᵀ = a. Throws NotPositiveDefinite naming
// the first failing pivot; `what` prefixes the message.
Matrix cholesky_lower(const Matrix& a, const char* what = "matrix");

// Inverse of an SPD matrix through its Cholesky factor.
Matrix spd_inverse(const Matrix& a, const char* what = "matrix");

// log|a| for SPD a, given its lower Cholesky factor.
inline double log_det_from_chol(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

// Symmetrize in place: a ← (a + aᵀ)/2.
inline void symmetrize(Matrix& a) { a = 0.5 * (a + a.transpose()).eval(); }

}  // namespace gmix
