#include "gmix/dataset.hpp"

#include <algorithm>
#include <vector>

#include "gmix/error.hpp"

namespace gmix {

DataSet::DataSet(Matrix observations) : y_(std::move(observations)) {
  if (y_.rows() < 1 || y_.cols() < 1) throw ValidationError("data set must be non-empty");
  if (!y_.allFinite()) throw ValidationError("data set contains non-finite values");
  const Eigen::Index n = y_.rows();
  const Eigen::Index d = y_.cols();
  ranges_ = y_.colwise().maxCoeff().transpose() - y_.colwise().minCoeff().transpose();
  mean_ = y_.colwise().mean().transpose();
  medians_.resize(d);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = y_(i, l);
    std::sort(column.begin(), column.end());
    const std::size_t mid = column.size() / 2;
    medians_(l) = column.size() % 2 == 1 ? column[mid] : 0.5 * (column[mid - 1] + column[mid]);
  }
  if (n > 1) {
    const Matrix centred = y_.rowwise() - mean_.transpose();
    covariance_ = (centred.transpose() * centred) / static_cast<double>(n - 1);
  } else {
    covariance_ = Matrix::Zero(d, d);
  }
}

}  // namespace gmix
