#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gmix/dataset.hpp"
#include "gmix/rng.hpp"

namespace gmix {

// Three-component isotropic benchmark: weights (0.35, 0.2, 0.45), means
// μ₁ = (1, 4, 1, 4, ...), μ₂ = (1, ..., 1), μ₃ = (4, ..., 4), Σ_g = τ I.
struct ScenarioSpec {
  int d = 50;
  int n = 1000;
  double tau = 1.0;
  std::array<double, 3> weights{0.35, 0.2, 0.45};
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;

  void validate() const;
};

// d × 3, one column per component.
Matrix scenario_means(int d);

struct SimulatedData {
  DataSet data;
  std::vector<int> labels;  // 0-based true component per row
};

SimulatedData simulate_scenario(const ScenarioSpec& spec);

// η N(μ₁, σ²) + (1 - η) N(μ₂, σ²), one column.
SimulatedData simulate_two_mean(int n, double eta, double mu1, double mu2, double sigma2,
                                std::uint64_t seed, std::uint64_t stream = 0);

// ∫ min(f_a, f_b) for N(mean_a, τI) and N(mean_b, τI): 2Φ(-Δ / (2√τ)).
double overlap(const Vector& mean_a, const Vector& mean_b, double tau);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// ∫ min(f_a, f_b) = E_{y ~ f_a}[min(1, f_b(y)/f_a(y))], general covariances.
McEstimate overlap_mc(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                      const Matrix& cov_b, RngStream& rng, long draws);

// Exact posterior of the two-mean model by summing over all 2ⁿ allocations.
struct TwoMeanPosterior {
  double mean_mu1 = 0.0;
  double mean_mu2 = 0.0;
  double var_mu1 = 0.0;
  double var_mu2 = 0.0;
  double log_marginal = 0.0;           // log p(y)
  std::vector<double> prob_first;      // P(z_i = 1 | y)
};

TwoMeanPosterior exact_two_mean_posterior(std::span<const double> y, double eta, double sigma2,
                                          double prior_var);

// CSV: header "y1,...,yd[,label]", one row per observation, labels 0-based.
void write_dataset_csv(const std::string& path, const DataSet& data,
                       const std::vector<int>* labels = nullptr);

struct LoadedData {
  DataSet data;
  std::vector<int> labels;  // empty when the file has no label column
};
LoadedData read_dataset_csv(const std::string& path);

}  // namespace gmix
