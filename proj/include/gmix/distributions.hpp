#pragma once

#include <span>

#include "gmix/linalg.hpp"
#include "gmix/rng.hpp"

namespace gmix {

// Wishart distribution in the shape/rate convention used throughout:
//   p(Ω) ∝ |Ω|^{shape - (d+1)/2} exp(-tr(rate · Ω)),   E(Ω) = shape · rate⁻¹.
// This is the textbook Wishart with ν = 2·shape degrees of freedom and scale
// matrix (2·rate)⁻¹; for d = 1 it is Gamma(shape, rate).
struct WishartParams {
  double shape = 0.0;
  Matrix rate;

  int dim() const { return static_cast<int>(rate.rows()); }
};

// Textbook (ν, scale) view of WishartParams. The only place the
// shape/rate ↔ degrees-of-freedom/scale conversion happens.
struct StandardWishart {
  double dof;
  Matrix scale;
};
StandardWishart to_standard(const WishartParams& p);

// Lower Cholesky factor of the standard scale matrix (2·rate)⁻¹.
Matrix wishart_scale_factor(const Matrix& rate);

double sample_gamma(RngStream& rng, double shape, double rate);

// log of a Gamma(shape, 1) draw; finite even when the draw itself underflows
// (shape ≪ 1).
double sample_log_gamma(RngStream& rng, double shape);

// Generalized inverse Gaussian with density ∝ x^{p-1} exp(-(a x + b/x)/2).
// b = 0 (p > 0) and a = 0 (p < 0) fall back to the Gamma and inverse-Gamma
// limits.
double sample_gig(RngStream& rng, double p, double a, double b);

Vector sample_dirichlet(RngStream& rng, std::span<const double> concentration);

// Same draw as sample_dirichlet but returned as log weights, so weights far
// below the smallest double stay representable.
Vector sample_dirichlet_log(RngStream& rng, std::span<const double> concentration);

Vector sample_mvnormal(RngStream& rng, const Vector& mean, const Matrix& cov);

// Draw mean + lower · z with z standard normal.
Vector sample_mvnormal_chol(RngStream& rng, const Vector& mean, const Matrix& lower);

// Bartlett draw: returns the lower Cholesky factor of Ω ~ Wishart, given the
// shape and the lower factor of the standard scale matrix.
Matrix sample_wishart_factor(RngStream& rng, double shape, const Matrix& scale_factor);

Matrix sample_wishart(RngStream& rng, const WishartParams& params);
Matrix sample_inv_wishart(RngStream& rng, const WishartParams& params);

Matrix wishart_mean(const WishartParams& params);
// E(Ω⁻¹) = rate / (shape - (d+1)/2); requires shape > (d+1)/2.
Matrix inv_wishart_mean(const WishartParams& params);

double logpdf_wishart(const Matrix& omega, const WishartParams& params);

// log Γ_d(c) = d(d-1)/4 · log π + Σ_{j=1..d} log Γ((2c + 1 - j)/2).
double lngamma_d(int d, double c);

double logpdf_mvnormal(const Vector& y, const Vector& mean, const Matrix& cov);

// Multivariate normal with a cached factorization. Built either from a
// covariance (factorized once) or directly from the lower Cholesky factor of
// a precision matrix, which is what the Gibbs sampler holds.
class GaussianDensity {
 public:
  static GaussianDensity from_covariance(Vector mean, const Matrix& cov);
  static GaussianDensity from_precision_factor(Vector mean, Matrix precision_lower);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }

  double logpdf(const Vector& y) const;

  // out(i) = logpdf(rows.row(i)).
  void logpdf_rows(const Matrix& rows, Eigen::Ref<Vector> out) const;

 private:
  GaussianDensity() = default;

  Vector mean_;
  Matrix factor_;
  bool factor_is_precision_ = false;
  double log_norm_ = 0.0;
};

double log_sum_exp(std::span<const double> values);

}  // namespace gmix
