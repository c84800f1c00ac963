#include "gmix/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gmix/error.hpp"
#include "gmix/kmeans.hpp"

namespace gmix {
namespace {

constexpr int kMaxIterations = 50;
constexpr int kMahalanobisPasses = 2;

struct PooledPoint {
  int record;
  int label;
};

double choose2(double m) { return 0.5 * m * (m - 1.0); }

// Lower Cholesky factors of the per-centroid covariances, ridge-stabilized.
std::vector<Matrix> centroid_factors(const Matrix& points, const std::vector<int>& labels,
                                     const Matrix& centers) {
  const Eigen::Index k = centers.rows();
  const Eigen::Index d = centers.cols();
  std::vector<Matrix> scatter(static_cast<std::size_t>(k), Matrix::Zero(d, d));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    const Vector dev = (points.row(i) - centers.row(c)).transpose();
    scatter[static_cast<std::size_t>(c)].selfadjointView<Eigen::Lower>().rankUpdate(dev);
    ++counts[static_cast<std::size_t>(c)];
  }
  const Vector global_var = ((points.rowwise() - points.colwise().mean()).colwise().squaredNorm() /
                             std::max<double>(1.0, static_cast<double>(points.rows()) - 1.0))
                                .transpose();
  const double floor = 1e-9 * std::max(global_var.mean(), 1e-300);
  std::vector<Matrix> factors;
  for (Eigen::Index c = 0; c < k; ++c) {
    Matrix cov = scatter[static_cast<std::size_t>(c)].selfadjointView<Eigen::Lower>();
    const int m = counts[static_cast<std::size_t>(c)];
    if (m > 1) {
      cov /= static_cast<double>(m - 1);
    } else {
      cov = global_var.asDiagonal();
    }
    cov.diagonal().array() += floor;
    factors.push_back(cholesky_lower(cov, "centroid covariance"));
  }
  return factors;
}

double mahalanobis_sq(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& centre,
                      const Matrix& factor) {
  return factor.triangularView<Eigen::Lower>().solve(Vector(x - centre)).squaredNorm();
}

int nearest(const Eigen::Ref<const Vector>& x, const Matrix& centers, const std::vector<Matrix>& factors) {
  int best = 0;
  double best_d = INFINITY;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double dist = mahalanobis_sq(x, centers.row(c).transpose(), factors[static_cast<std::size_t>(c)]);
    if (dist < best_d) {
      best_d = dist;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

ClusterCountStats count_nonempty(const ChainTrace& trace) {
  if (trace.records.empty()) throw EmptyResult("trace has no recorded sweeps");
  ClusterCountStats s;
  std::map<int, int> freq;
  double total = 0.0;
  for (const auto& rec : trace.records) {
    s.per_sweep.push_back(rec.nonempty);
    ++freq[rec.nonempty];
    total += rec.nonempty;
  }
  for (const auto& [value, count] : freq) {
    if (count > s.mode_frequency) {
      s.mode = value;
      s.mode_frequency = count;
    }
  }
  s.mean = total / static_cast<double>(trace.records.size());
  s.min = freq.begin()->first;
  s.max = freq.rbegin()->first;
  return s;
}

ReplicateCounts summarize_replicates(std::span<const ClusterCountStats> chains) {
  if (chains.empty()) throw EmptyResult("no replicates to summarize");
  ReplicateCounts r;
  double sum = 0.0;
  for (const auto& c : chains) {
    r.modes.push_back(c.mode);
    sum += c.mean;
  }
  r.min_mode = *std::min_element(r.modes.begin(), r.modes.end());
  r.max_mode = *std::max_element(r.modes.begin(), r.modes.end());
  r.mean_of_means = sum / static_cast<double>(chains.size());
  return r;
}

RelabeledSummary relabel_pointprocess(const ChainTrace& trace, int target) {
  if (target < 1) throw DomainError("relabel target must be >= 1");
  RelabeledSummary out;
  out.target = target;
  std::vector<PooledPoint> pooled;
  for (std::size_t r = 0; r < trace.records.size(); ++r) {
    const auto& rec = trace.records[r];
    if (rec.nonempty != target) continue;
    out.retained.push_back(static_cast<int>(r));
    for (std::size_t g = 0; g < rec.counts.size(); ++g) {
      if (rec.counts[g] > 0) pooled.push_back({static_cast<int>(r), static_cast<int>(g)});
    }
  }
  if (out.retained.empty()) {
    throw EmptyResult("no sweep has exactly " + std::to_string(target) + " non-empty components");
  }
  const int d = trace.dim;
  Matrix points(static_cast<Eigen::Index>(pooled.size()), d);
  for (std::size_t p = 0; p < pooled.size(); ++p) {
    points.row(static_cast<Eigen::Index>(p)) =
        trace.records[static_cast<std::size_t>(pooled[p].record)].means.col(pooled[p].label).transpose();
  }

  // Warm start from the first retained sweep's components.
  Matrix centers = points.topRows(target);
  KMeansResult euclid = lloyd(points, centers, kMaxIterations);
  centers = euclid.centers;
  std::vector<int> labels = euclid.labels;
  std::vector<Matrix> factors = centroid_factors(points, labels, centers);
  for (int pass = 0; pass < kMahalanobisPasses; ++pass) {
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
      labels[static_cast<std::size_t>(p)] = nearest(points.row(p).transpose(), centers, factors);
    }
    Matrix sums = Matrix::Zero(target, d);
    std::vector<int> counts(static_cast<std::size_t>(target), 0);
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
      sums.row(labels[static_cast<std::size_t>(p)]) += points.row(p);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(p)])];
    }
    for (int c = 0; c < target; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
    factors = centroid_factors(points, labels, centers);
  }
  out.centroids = centers;

  // Per-sweep mapping.
  std::size_t p = 0;
  for (int r : out.retained) {
    const auto& rec = trace.records[static_cast<std::size_t>(r)];
    std::vector<int> assign(rec.counts.size(), -1);
    std::vector<bool> used(static_cast<std::size_t>(target), false);
    bool bijective = true;
    for (; p < pooled.size() && pooled[p].record == r; ++p) {
      const int c = nearest(points.row(static_cast<Eigen::Index>(p)).transpose(), centers, factors);
      assign[static_cast<std::size_t>(pooled[p].label)] = c;
      if (used[static_cast<std::size_t>(c)]) bijective = false;
      used[static_cast<std::size_t>(c)] = true;
    }
    out.assignment.push_back(std::move(assign));
    out.is_permutation.push_back(bijective);
  }

  // Identified moments.
  const bool have_cov = trace.records.front().cov_diag.size() > 0;
  std::vector<double> w_sum(static_cast<std::size_t>(target), 0.0), w_sq(static_cast<std::size_t>(target), 0.0);
  std::vector<Vector> m_sum(static_cast<std::size_t>(target), Vector::Zero(d));
  std::vector<Vector> m_sq = m_sum, c_sum = m_sum, c_sq = m_sum;
  int valid = 0;
  for (std::size_t k = 0; k < out.retained.size(); ++k) {
    if (!out.is_permutation[k]) continue;
    ++valid;
    const auto& rec = trace.records[static_cast<std::size_t>(out.retained[k])];
    for (std::size_t g = 0; g < out.assignment[k].size(); ++g) {
      const int c = out.assignment[k][g];
      if (c < 0) continue;
      const auto cu = static_cast<std::size_t>(c);
      const double w = rec.weights(static_cast<Eigen::Index>(g));
      w_sum[cu] += w;
      w_sq[cu] += w * w;
      const Vector mu = rec.means.col(static_cast<Eigen::Index>(g));
      m_sum[cu] += mu;
      m_sq[cu] += mu.cwiseAbs2();
      if (have_cov) {
        const Vector cd = rec.cov_diag.col(static_cast<Eigen::Index>(g));
        c_sum[cu] += cd;
        c_sq[cu] += cd.cwiseAbs2();
      }
    }
  }
  out.valid_fraction = static_cast<double>(valid) / static_cast<double>(out.retained.size());
  const auto sd = [valid](double sum, double sq) {
    if (valid < 2) return 0.0;
    const double m = sum / valid;
    return std::sqrt(std::max(0.0, (sq - valid * m * m) / (valid - 1)));
  };
  for (int c = 0; c < target; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    ComponentSummary s;
    if (valid > 0) {
      s.weight_mean = w_sum[cu] / valid;
      s.weight_sd = sd(w_sum[cu], w_sq[cu]);
      s.mean_mean = m_sum[cu] / valid;
      s.mean_sd = Vector(d);
      for (int l = 0; l < d; ++l) s.mean_sd(l) = sd(m_sum[cu](l), m_sq[cu](l));
      if (have_cov) {
        s.cov_diag_mean = c_sum[cu] / valid;
        s.cov_diag_sd = Vector(d);
        for (int l = 0; l < d; ++l) s.cov_diag_sd(l) = sd(c_sum[cu](l), c_sq[cu](l));
      }
    }
    out.components.push_back(std::move(s));
  }
  return out;
}

double adjusted_rand(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw DomainError("adjusted_rand: partitions have different lengths (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  std::map<std::pair<int, int>, long> table;
  std::map<int, long> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    ++table[{a[i], b[i]}];
    ++rows[a[i]];
    ++cols[b[i]];
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : table) index += choose2(static_cast<double>(c));
  for (const auto& [key, c] : rows) sum_a += choose2(static_cast<double>(c));
  for (const auto& [key, c] : cols) sum_b += choose2(static_cast<double>(c));
  const double pairs = choose2(static_cast<double>(n));
  if (pairs == 0.0) return 1.0;
  const double expected = sum_a * sum_b / pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) {
    // Both partitions trivial (all-in-one or all singletons).
    return rows.size() == cols.size() ? 1.0 : 0.0;
  }
  return (index - expected) / (max_index - expected);
}

std::vector<int> map_partition(const ChainTrace& trace, const RelabeledSummary* relabel) {
  const int n = trace.observations;
  const int labels = relabel ? relabel->target : trace.components;
  std::vector<int> votes(static_cast<std::size_t>(n) * static_cast<std::size_t>(labels), 0);
  int voters = 0;
  const auto vote = [&](const SweepRecord& rec, const std::vector<int>* mapping) {
    if (rec.allocations.size() != static_cast<std::size_t>(n)) {
      throw EmptyResult("trace does not carry allocations for sweep " + std::to_string(rec.sweep));
    }
    for (int i = 0; i < n; ++i) {
      int label = rec.allocations[static_cast<std::size_t>(i)];
      if (mapping) label = (*mapping)[static_cast<std::size_t>(label)];
      ++votes[static_cast<std::size_t>(i) * static_cast<std::size_t>(labels) + static_cast<std::size_t>(label)];
    }
    ++voters;
  };
  if (relabel) {
    for (std::size_t k = 0; k < relabel->retained.size(); ++k) {
      if (!relabel->is_permutation[k]) continue;
      vote(trace.records[static_cast<std::size_t>(relabel->retained[k])], &relabel->assignment[k]);
    }
  } else {
    for (const auto& rec : trace.records) vote(rec, nullptr);
  }
  if (voters == 0) throw EmptyResult("no sweeps available to form a partition");
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int* row = votes.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(labels);
    out[static_cast<std::size_t>(i)] = static_cast<int>(std::max_element(row, row + labels) - row);
  }
  return out;
}

}  // namespace gmix
