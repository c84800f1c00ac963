#include "gmix/kmeans.hpp"

#include <limits>

#include "gmix/error.hpp"

namespace gmix {
namespace {

// Squared distances, rows = points, cols = centers.
Matrix squared_distances(const Matrix& points, const Matrix& centers) {
  Matrix dist = (-2.0 * points * centers.transpose()).eval();
  dist.colwise() += points.rowwise().squaredNorm();
  dist.rowwise() += centers.rowwise().squaredNorm().transpose();
  return dist.cwiseMax(0.0);
}

Matrix plus_plus_seeds(const Matrix& points, int k, RngStream& rng) {
  const Eigen::Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  Vector nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= nearest(i);
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
    nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult lloyd(const Matrix& points, Matrix centers, int max_iter) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centers.rows();
  KMeansResult out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iter; ++it) {
    const Matrix dist = squared_distances(points, centers);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      dist.row(i).minCoeff(&best);  // first minimum on ties
      if (out.labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    out.iterations = it + 1;
    if (!changed && it > 0) break;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = out.labels[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
      }
    }
    if (!changed) break;
  }
  out.within_ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    out.within_ss += (points.row(i) - centers.row(out.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  out.centers = std::move(centers);
  return out;
}

KMeansResult kmeans(const Matrix& points, int k, RngStream& rng, int restarts, int max_iter) {
  if (k < 1) throw DomainError("kmeans needs k >= 1");
  if (points.rows() < 1) throw DomainError("kmeans needs at least one point");
  KMeansResult best;
  best.within_ss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansResult run = lloyd(points, plus_plus_seeds(points, k, rng), max_iter);
    if (run.within_ss < best.within_ss) best = std::move(run);
  }
  return best;
}

}  // namespace gmix
