#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gmix {

// Outcome of one table replication: a rendered text table, per-cell detail
// and a pass count against the stored reference values.
struct TableCheck {
  std::string table;
  std::string rendered;
  nlohmann::json details;
  int passed = 0;
  int checked = 0;
  bool ok() const { return checked > 0 && passed == checked; }
};

using StatusFn = std::function<void(const std::string&)>;

// φ_det for d ∈ {2, 4, 50, 100, 150, 200} × R² ∈ {0.5, 0.67, 0.75, 0.9},
// compared to the reference values within `tolerance`.
TableCheck replicate_phidet(double tolerance = 0.005);

// Overlap between neighbouring scenario components for d ∈ {2, 4, 50, 100,
// 200}; d = 50 is reported but not checked.
TableCheck replicate_overlap();

struct CountsOptions {
  int d = 50;
  int n = 5000;
  int sweeps = 1000;
  int burn_in = 100;
  int replicates = 3;
  int components = 10;
  double e0 = 1e-4;
  int kmeans_restarts = 10;
  int workers = 1;
  std::uint64_t seed = 1;
  int expected = 3;
};

// Hierarchical-prior sparse mixture on one simulated data set, several
// independent chains; passes when every chain's modal G⁺ equals `expected`.
TableCheck replicate_counts(const CountsOptions& options, const StatusFn& status = {});

struct ClusteringCell {
  std::string name;
  int d = 50;
  int n = 1000;
  // Pass rule: modal G⁺ == expected_mode (and r_a ≥ min_rand when > 0) in at
  // least `required` of the data sets.
  int expected_mode = 3;
  double min_rand = 0.0;
  int required = 4;
  std::string reference;  // reference entry, for display
};

std::vector<ClusteringCell> default_clustering_cells();

struct ClusteringOptions {
  std::vector<ClusteringCell> cells = default_clustering_cells();
  int datasets = 5;
  int sweeps = 2000;
  int burn_in = 200;
  int components = 30;
  double e0 = 0.01;
  double r2 = 0.5;
  int workers = 1;
  std::uint64_t seed = 1;
};

// Determinant-criterion prior, λ fixed at 1, k-means start.
TableCheck replicate_clustering(const ClusteringOptions& options, const StatusFn& status = {});

}  // namespace gmix
