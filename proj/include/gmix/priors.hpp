#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gmix/dataset.hpp"
#include "gmix/distributions.hpp"

namespace gmix {

enum class CovPriorMode { hierarchical, trace, determinant };

// fixed: b₀ stays at m₀. sampled: b₀ | μ under the improper prior M₀⁻¹ = 0.
enum class MeanCenterMode { fixed, sampled };

// fixed: λ_l held at `lambda`. gamma: λ_l ~ Gamma(ν₁, ν₂) updated each sweep.
enum class ShrinkageMode { fixed, gamma };

std::string to_string(CovPriorMode mode);
CovPriorMode parse_cov_prior_mode(const std::string& text);

// User-facing prior description, resolved against a data set by
// resolve_prior().
struct PriorConfig {
  int max_components = 10;

  // Symmetric Dirichlet concentration. The Gamma(a, a·G) hyperprior is
  // recorded for provenance but e₀ is never sampled.
  double e0 = 0.01;
  double e0_hyper_a = 10.0;

  MeanCenterMode mean_center = MeanCenterMode::sampled;
  std::optional<Vector> m0;  // defaults to the column medians

  ShrinkageMode shrinkage = ShrinkageMode::fixed;
  double lambda = 1.0;
  double nu1 = 0.5;
  double nu2 = 0.5;

  CovPriorMode cov_mode = CovPriorMode::hierarchical;
  std::optional<double> c0;  // defaults to 2.5 + (d-1)/2
  double r2 = 0.5;           // target R² for trace/determinant modes

  // Throws ValidationError on the first violated invariant.
  void validate(int d) const;
};

double default_c0(int d);

// φ_tr = (1 - R²)(c₀ - (d+1)/2).
double phi_tr(double r2, double c0, int d);

// φ_det = [(1 - R²) · Γ_d(c₀) / Γ_d(c₀ - 1)]^{1/d}, evaluated in log space.
// The root applies to the whole product, so that E(R²_det) = R² under
// W ~ Wishart(c₀, I) with E|W⁻¹| = Γ_d(c₀-1)/Γ_d(c₀).
double phi_det(double r2, double c0, int d);

struct CovariancePrior {
  CovPriorMode mode = CovPriorMode::hierarchical;
  double c0 = 0.0;
  // Fixed rate for trace/determinant modes; starting value (the prior mean
  // g₀ G₀⁻¹) for the hierarchical mode, where it is resampled every sweep.
  Matrix C0;
  double g0 = 0.0;  // hierarchical only
  Matrix G0;        // hierarchical only
  double phi = 0.0; // trace/determinant only
  std::vector<std::string> warnings;
};

CovariancePrior build_cov_prior(const PriorConfig& config, const DataSet& data);

struct MeanPrior {
  MeanCenterMode center = MeanCenterMode::sampled;
  Vector m0;
  Vector range_sq;  // R_l²
  ShrinkageMode shrinkage = ShrinkageMode::fixed;
  double lambda = 1.0;
  double nu1 = 0.5;
  double nu2 = 0.5;
};

// Everything the sampler needs, with data-dependent quantities filled in.
struct ResolvedPrior {
  int components = 0;
  double e0 = 0.0;
  MeanPrior mean;
  CovariancePrior cov;
};

ResolvedPrior resolve_prior(const PriorConfig& config, const DataSet& data);

struct MixtureMoments {
  Vector mean;
  Matrix cov;
};

// Cov(y) = Σ η_g Σ_g + Σ η_g (μ_g - E y)(μ_g - E y)ᵀ.
MixtureMoments mixture_moments(std::span<const double> weights, const std::vector<Vector>& means,
                               const std::vector<Matrix>& covs);

double r2_tr(std::span<const double> weights, const std::vector<Matrix>& covs,
             const Matrix& total_cov);
double r2_det(std::span<const double> weights, const std::vector<Matrix>& covs,
              const Matrix& total_cov);

}  // namespace gmix
