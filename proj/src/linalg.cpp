#include "gmix/linalg.hpp"

#include <cmath>
#include <string>

#include "gmix/error.hpp"

namespace gmix {
namespace {

// Unblocked factorization, only run after Eigen reports failure, to name the
// pivot.
std::size_t failing_pivot(const Matrix& a) {
  const Eigen::Index d = a.rows();
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double s = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(s > 0.0) || !std::isfinite(s)) return static_cast<std::size_t>(j);
    l(j, j) = std::sqrt(s);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return static_cast<std::size_t>(d == 0 ? 0 : d - 1);
}

}  // namespace

Matrix cholesky_lower(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success || !llt.matrixL().toDenseMatrix().allFinite()) {
    throw NotPositiveDefinite(std::string(what) + " is not positive definite", failing_pivot(a));
  }
  return llt.matrixL();
}

Matrix spd_inverse(const Matrix& a, const char* what) {
  const Matrix l = cholesky_lower(a, what);
  const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(a.rows(), a.cols()));
  return l_inv.transpose() * l_inv;
}

}  // namespace gmix
