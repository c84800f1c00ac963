#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmix/dataset.hpp"
#include "gmix/priors.hpp"
#include "gmix/rng.hpp"

namespace gmix {

// Parameters and latent allocations after one Gibbs sweep. Components are
// indexed 0..G-1; means are stored column-wise (d × G).
struct MixtureState {
  Vector log_weights;
  Matrix means;
  // Lower Cholesky factors K_g of the precisions: Σ_g⁻¹ = K_g K_gᵀ.
  std::vector<Matrix> precision_chol;
  std::vector<int> z;

  // Sufficient statistics, kept consistent with z.
  std::vector<int> counts;
  Matrix sums;  // d × G, column g = Σ_{z_i = g} y_i

  // Hyperparameter draws.
  Vector b0;
  Matrix C0;
  Vector lambda;

  int components() const { return static_cast<int>(log_weights.size()); }
  int dim() const { return static_cast<int>(means.rows()); }
  Vector weights() const { return log_weights.array().exp(); }
  int nonempty() const;

  Matrix precision(int g) const;
  Matrix covariance(int g) const;
  double log_det_cov(int g) const;
};

// Recompute counts and sums from z.
void recompute_statistics(MixtureState& state, const DataSet& data);

// Largest absolute difference between the stored statistics and a
// recomputation from z (counts and sums together).
double statistics_discrepancy(const MixtureState& state, const DataSet& data);

struct AllocationOptions {
  int workers = 1;
  // Observations are split into fixed blocks, each with its own substream
  // keyed off one draw from the chain stream, so the result does not depend
  // on the number of workers.
  int block_size = 256;
};

// z_i ∝ η_g N(y_i; μ_g, Σ_g), then statistics. Throws NumericalFailure
// naming i if no component has positive density at y_i.
void step_allocations(RngStream& rng, MixtureState& state, const DataSet& data,
                      const AllocationOptions& options = {});

// Log weights of a Dirichlet(e₀ + n_1, ..., e₀ + n_G) draw.
Vector step_weights(RngStream& rng, const std::vector<int>& counts, double e0);

void step_means(RngStream& rng, MixtureState& state, const DataSet& data, const ResolvedPrior& prior);
void step_covariances(RngStream& rng, MixtureState& state, const DataSet& data,
                      const ResolvedPrior& prior);
void step_hypers(RngStream& rng, MixtureState& state, const ResolvedPrior& prior);

// Relabel every component-indexed quantity: new label g holds what old label
// perm[g] held. Allocations are mapped accordingly.
void apply_permutation(MixtureState& state, const std::vector<int>& perm);

// Uniform draw from S(G), applied; returns the permutation.
std::vector<int> step_permute(RngStream& rng, MixtureState& state);

// Unnormalized log joint density of (y, z, η, μ, Σ⁻¹, hypers).
double log_posterior(const MixtureState& state, const DataSet& data, const ResolvedPrior& prior);

// State with every hyperparameter at its starting value and parameters drawn
// from the prior (z empty).
MixtureState prior_draw(RngStream& rng, const DataSet& data, const ResolvedPrior& prior);

// Takes the given allocations and draws parameters from their full
// conditionals (covariances around the cluster means, then means, weights
// and hypers), so the chain can start with the allocation step.
MixtureState state_from_allocations(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                                    std::vector<int> z);

struct InitSpec {
  enum class Kind { kmeans, prior_draw, allocations };
  Kind kind = Kind::kmeans;
  int kmeans_restarts = 10;
  std::vector<int> allocations;  // for Kind::allocations

  static InitSpec parse(const std::string& text);
};
std::string to_string(InitSpec::Kind kind);

struct ChainOptions {
  int sweeps = 10000;  // recorded sweeps
  int burn_in = 1000;  // discarded sweeps before recording
  bool permute = false;
  AllocationOptions allocation;
  bool record_allocations = true;
  bool record_cov_diag = true;
  bool record_full_cov = false;
  bool keep_records = true;  // hold records in the returned trace
};

struct SweepRecord {
  int sweep = 0;  // 0-based index among recorded sweeps
  Vector weights;
  Matrix means;  // d × G
  Vector log_det_cov;
  std::vector<int> counts;
  int nonempty = 0;
  Matrix cov_diag;              // d × G, empty unless recorded
  std::vector<int> allocations; // empty unless recorded
  std::vector<Matrix> full_cov; // empty unless recorded
};

struct ChainTrace {
  int components = 0;
  int dim = 0;
  int observations = 0;
  std::string config_hash;
  std::vector<SweepRecord> records;
};

// Receives each record as soon as the sweep finishes.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void write(const SweepRecord& record) = 0;
};

// A sweep failed. Carries the absolute sweep index (burn-in included) and a
// JSON snapshot of the state before the failing step.
class ChainError : public std::runtime_error {
 public:
  ChainError(int sweep, std::string snapshot, const std::string& cause, bool numerical)
      : std::runtime_error("sweep " + std::to_string(sweep) + ": " + cause),
        sweep_(sweep),
        snapshot_(std::move(snapshot)),
        numerical_(numerical) {}
  int sweep() const { return sweep_; }
  const std::string& snapshot() const { return snapshot_; }
  bool numerical() const { return numerical_; }

 private:
  int sweep_;
  std::string snapshot_;
  bool numerical_;
};

std::string snapshot_json(const MixtureState& state);

SweepRecord make_record(const MixtureState& state, int sweep, const ChainOptions& options);

using ProgressFn = std::function<void(int sweep, int total)>;

// Burn-in then `sweeps` recorded sweeps of: allocations, weights, means,
// covariances, hypers, optional random permutation.
ChainTrace run_chain(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                     const InitSpec& init, const ChainOptions& options, TraceSink* sink = nullptr,
                     const ProgressFn& progress = {});

// Same, starting from an explicit state.
ChainTrace run_chain_from(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                          MixtureState state, const ChainOptions& options, TraceSink* sink = nullptr,
                          const ProgressFn& progress = {});

}  // namespace gmix
