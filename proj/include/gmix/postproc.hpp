#pragma once

#include <span>
#include <vector>

#include "gmix/gibbs.hpp"

namespace gmix {

struct ClusterCountStats {
  std::vector<int> per_sweep;  // G⁺ of every recorded sweep
  int mode = 0;                // most frequent G⁺ (smallest on ties)
  int mode_frequency = 0;
  double mean = 0.0;           // posterior mean of G⁺
  int min = 0;
  int max = 0;
};

ClusterCountStats count_nonempty(const ChainTrace& trace);

// Spread of the modal G⁺ over independent replicates.
struct ReplicateCounts {
  std::vector<int> modes;
  int min_mode = 0;
  int max_mode = 0;
  double mean_of_means = 0.0;
};

ReplicateCounts summarize_replicates(std::span<const ClusterCountStats> chains);

struct ComponentSummary {
  double weight_mean = 0.0;
  double weight_sd = 0.0;
  Vector mean_mean;
  Vector mean_sd;
  Vector cov_diag_mean;  // empty if the trace carries no covariance diagonals
  Vector cov_diag_sd;
};

struct RelabeledSummary {
  int target = 0;
  Matrix centroids;  // target × d
  std::vector<ComponentSummary> components;
  // Indices into trace.records of sweeps with exactly `target` non-empty
  // components.
  std::vector<int> retained;
  // For each retained sweep: label → centroid (-1 for empty labels).
  std::vector<std::vector<int>> assignment;
  std::vector<bool> is_permutation;
  double valid_fraction = 0.0;  // among retained sweeps
};

// Point-process relabeling: pool the non-empty component means of the
// retained sweeps, cluster them around `target` centroids (Euclidean Lloyd
// warm start, then Mahalanobis refinement passes with per-centroid
// covariances), and map each sweep's components to centroids. Sweeps whose
// mapping is not a bijection are excluded from the summaries.
//
// Throws EmptyResult when no sweep has `target` non-empty components.
RelabeledSummary relabel_pointprocess(const ChainTrace& trace, int target);

// Hubert–Arabie adjusted Rand index. Labels are arbitrary integers.
double adjusted_rand(std::span<const int> a, std::span<const int> b);

// Modal allocation per observation. With a relabeling, only valid retained
// sweeps vote and labels are mapped to centroids; without one, every sweep
// votes with its raw labels. Ties go to the lowest label.
std::vector<int> map_partition(const ChainTrace& trace, const RelabeledSummary* relabel = nullptr);

}  // namespace gmix
