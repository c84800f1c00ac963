#pragma once

#include "gmix/linalg.hpp"

namespace gmix {

// n × d observation matrix (one row per observation) together with the
// column summaries the priors are built from.
class DataSet {
 public:
  DataSet() = default;
  explicit DataSet(Matrix observations);

  const Matrix& y() const { return y_; }
  int n() const { return static_cast<int>(y_.rows()); }
  int d() const { return static_cast<int>(y_.cols()); }

  // max - min per column.
  const Vector& ranges() const { return ranges_; }
  const Vector& medians() const { return medians_; }
  const Vector& mean() const { return mean_; }
  // Empirical covariance with the n - 1 denominator (zero when n = 1).
  const Matrix& covariance() const { return covariance_; }

 private:
  Matrix y_;
  Vector ranges_;
  Vector medians_;
  Vector mean_;
  Matrix covariance_;
};

}  // namespace gmix
