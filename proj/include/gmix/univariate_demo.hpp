#pragma once

#include <span>
#include <vector>

#include "gmix/rng.hpp"

namespace gmix {

// η N(μ₁, σ²) + (1 - η) N(μ₂, σ²) with η and σ² known and independent
// N(0, prior_var) priors on both means.
struct TwoMeanModel {
  double eta = 0.7;
  double sigma2 = 1.0;
  double prior_var = 10.0;  // 10 σ² for the textbook illustration

  void validate() const;
};

struct TwoMeanDraw {
  double mu1 = 0.0;
  double mu2 = 0.0;
  int n1 = 0;  // observations allocated to the first component
};

// Alternates z | μ (independent Bernoulli draws) and μ | z, where
//   μ_g | z, y ~ N(S_g / (κ + n_g), σ² / (κ + n_g)),  κ = σ² / prior_var.
// With permute = true each sweep ends with a fair coin flip swapping the two
// labels; only valid for η = 1/2.
std::vector<TwoMeanDraw> run_univariate_demo(RngStream& rng, std::span<const double> y,
                                             const TwoMeanModel& model, int sweeps, double init_mu1,
                                             double init_mu2, bool permute = false);

}  // namespace gmix
