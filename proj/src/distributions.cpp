#include "gmix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmix/error.hpp"

namespace gmix {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_spd_rate(const WishartParams& p) {
  if (p.rate.rows() != p.rate.cols() || p.rate.rows() == 0) {
    throw DomainError("Wishart rate must be a non-empty square matrix");
  }
  const double d = static_cast<double>(p.dim());
  if (!(p.shape > (d - 1.0) / 2.0)) {
    throw DomainError("Wishart shape " + std::to_string(p.shape) + " must exceed (d-1)/2 = " +
                      std::to_string((d - 1.0) / 2.0));
  }
}

// Standard GIG(λ ≥ 0, ω > 0) with density ∝ x^{λ-1} exp(-ω(x + 1/x)/2).
// Devroye (2014), "Random variate generation for the generalized inverse
// Gaussian distribution", uniformly fast rejection on log scale.
double sample_gig_standard(RngStream& rng, double lambda, double omega) {
  const double alpha = std::sqrt(omega * omega + lambda * lambda) - lambda;
  const auto psi = [&](double x) {
    return -alpha * (std::cosh(x) - 1.0) - lambda * (std::exp(x) - x - 1.0);
  };
  const auto dpsi = [&](double x) { return -alpha * std::sinh(x) - lambda * (std::exp(x) - 1.0); };

  double t;
  const double at_one = -psi(1.0);
  if (at_one >= 0.5 && at_one <= 2.0) {
    t = 1.0;
  } else if (at_one > 2.0) {
    t = std::sqrt(2.0 / (alpha + lambda));
  } else {
    t = std::log(4.0 / (alpha + 2.0 * lambda));
  }
  double s;
  const double at_minus_one = -psi(-1.0);
  if (at_minus_one >= 0.5 && at_minus_one <= 2.0) {
    s = 1.0;
  } else if (at_minus_one > 2.0) {
    s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lambda));
  } else {
    const double inv_a = 1.0 / alpha;
    const double tail = std::log1p(inv_a + std::sqrt(inv_a * inv_a + 2.0 * inv_a));
    s = lambda > 0.0 ? std::min(1.0 / lambda, tail) : tail;
  }

  const double eta = -psi(t);
  const double zeta = -dpsi(t);
  const double theta = -psi(-s);
  const double xi = dpsi(-s);
  const double p = 1.0 / xi;
  const double r = 1.0 / zeta;
  const double t_inner = t - r * eta;
  const double s_inner = s - p * theta;
  const double q = t_inner + s_inner;
  const double total = p + q + r;

  double x;
  for (;;) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double w = rng.uniform();
    if (u < q / total) {
      x = -s_inner + q * v;
    } else if (u < (q + r) / total) {
      x = t_inner - r * std::log(v);
    } else {
      x = -s_inner + p * std::log(v);
    }
    double chi;
    if (x > t_inner) {
      chi = std::exp(-eta - zeta * (x - t));
    } else if (x < -s_inner) {
      chi = std::exp(-theta + xi * (x + s));
    } else {
      chi = 1.0;
    }
    if (w * chi <= std::exp(psi(x))) break;
  }
  const double ratio = lambda / omega;
  return (ratio + std::sqrt(1.0 + ratio * ratio)) * std::exp(x);
}

}  // namespace

StandardWishart to_standard(const WishartParams& p) {
  require_spd_rate(p);
  return {2.0 * p.shape, spd_inverse(2.0 * p.rate, "Wishart rate")};
}

Matrix wishart_scale_factor(const Matrix& rate) {
  const Matrix rate_factor = cholesky_lower(2.0 * rate, "Wishart rate");
  const Eigen::Index d = rate.rows();
  const Matrix inv_factor =
      rate_factor.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  // (2C)⁻¹ = L⁻ᵀ L⁻¹; refactor to get a lower-triangular square root.
  return cholesky_lower(inv_factor.transpose() * inv_factor, "Wishart scale");
}

double sample_gamma(RngStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw DomainError("Gamma requires positive finite shape and rate");
  }
  if (shape < 1.0) {
    return sample_gamma(rng, shape + 1.0, rate) * std::pow(rng.uniform(), 1.0 / shape);
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double sample_log_gamma(RngStream& rng, double shape) {
  if (!(shape > 0.0)) throw DomainError("Gamma requires positive shape");
  if (shape < 1.0) {
    return std::log(sample_gamma(rng, shape + 1.0, 1.0)) + std::log(rng.uniform()) / shape;
  }
  return std::log(sample_gamma(rng, shape, 1.0));
}

double sample_gig(RngStream& rng, double p, double a, double b) {
  if (a < 0.0 || b < 0.0 || !std::isfinite(p)) throw DomainError("GIG requires a, b >= 0");
  if (b == 0.0) {
    if (!(p > 0.0) || !(a > 0.0)) throw DomainError("GIG with b = 0 requires p > 0, a > 0");
    return sample_gamma(rng, p, a / 2.0);
  }
  if (a == 0.0) {
    if (!(p < 0.0)) throw DomainError("GIG with a = 0 requires p < 0");
    return 1.0 / sample_gamma(rng, -p, b / 2.0);
  }
  const double omega = std::sqrt(a * b);
  const double scale = std::sqrt(b / a);
  if (p >= 0.0) return scale * sample_gig_standard(rng, p, omega);
  return scale / sample_gig_standard(rng, -p, omega);
}

Vector sample_dirichlet_log(RngStream& rng, std::span<const double> concentration) {
  if (concentration.empty()) throw DomainError("Dirichlet needs at least one component");
  Vector logs(static_cast<Eigen::Index>(concentration.size()));
  for (std::size_t g = 0; g < concentration.size(); ++g) {
    if (!(concentration[g] > 0.0)) {
      throw DomainError("Dirichlet concentration " + std::to_string(g) + " is not positive");
    }
  }
  for (std::size_t g = 0; g < concentration.size(); ++g) {
    logs(static_cast<Eigen::Index>(g)) = sample_log_gamma(rng, concentration[g]);
  }
  const double norm = log_sum_exp({logs.data(), static_cast<std::size_t>(logs.size())});
  logs.array() -= norm;
  return logs;
}

Vector sample_dirichlet(RngStream& rng, std::span<const double> concentration) {
  Vector w = sample_dirichlet_log(rng, concentration).array().exp();
  return w / w.sum();
}

Vector sample_mvnormal_chol(RngStream& rng, const Vector& mean, const Matrix& lower) {
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + lower.triangularView<Eigen::Lower>() * z;
}

Vector sample_mvnormal(RngStream& rng, const Vector& mean, const Matrix& cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DomainError("covariance shape does not match mean");
  }
  return sample_mvnormal_chol(rng, mean, cholesky_lower(cov, "covariance"));
}

Matrix sample_wishart_factor(RngStream& rng, double shape, const Matrix& scale_factor) {
  const Eigen::Index d = scale_factor.rows();
  if (!(shape > (static_cast<double>(d) - 1.0) / 2.0)) {
    throw DomainError("Wishart shape must exceed (d-1)/2");
  }
  Matrix bartlett = Matrix::Zero(d, d);
  // Diagonal: sqrt of χ²(2·shape - i) = 2·Gamma(shape - i/2, 1).
  for (Eigen::Index i = 0; i < d; ++i) {
    bartlett(i, i) = std::sqrt(2.0 * sample_gamma(rng, shape - 0.5 * static_cast<double>(i), 1.0));
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = j + 1; i < d; ++i) bartlett(i, j) = rng.normal();
  }
  Matrix factor = scale_factor.triangularView<Eigen::Lower>() * bartlett;
  return factor.triangularView<Eigen::Lower>();
}

Matrix sample_wishart(RngStream& rng, const WishartParams& params) {
  require_spd_rate(params);
  const Matrix k = sample_wishart_factor(rng, params.shape, wishart_scale_factor(params.rate));
  Matrix omega = k * k.transpose();
  symmetrize(omega);
  return omega;
}

Matrix sample_inv_wishart(RngStream& rng, const WishartParams& params) {
  require_spd_rate(params);
  const Matrix k = sample_wishart_factor(rng, params.shape, wishart_scale_factor(params.rate));
  const Eigen::Index d = k.rows();
  const Matrix k_inv = k.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  Matrix sigma = k_inv.transpose() * k_inv;
  symmetrize(sigma);
  return sigma;
}

Matrix wishart_mean(const WishartParams& params) {
  require_spd_rate(params);
  return params.shape * spd_inverse(params.rate, "Wishart rate");
}

Matrix inv_wishart_mean(const WishartParams& params) {
  require_spd_rate(params);
  const double denom = params.shape - (params.dim() + 1.0) / 2.0;
  if (!(denom > 0.0)) throw DomainError("inverse-Wishart mean requires shape > (d+1)/2");
  return params.rate / denom;
}

double logpdf_wishart(const Matrix& omega, const WishartParams& params) {
  require_spd_rate(params);
  const int d = params.dim();
  const double log_det_rate = log_det_from_chol(cholesky_lower(params.rate, "Wishart rate"));
  const double log_det_omega = log_det_from_chol(cholesky_lower(omega, "Wishart argument"));
  return params.shape * log_det_rate - lngamma_d(d, params.shape) +
         (params.shape - (d + 1.0) / 2.0) * log_det_omega - (params.rate.cwiseProduct(omega)).sum();
}

double lngamma_d(int d, double c) {
  if (d < 1) throw DomainError("lngamma_d requires d >= 1");
  const double smallest = (2.0 * c + 1.0 - d) / 2.0;
  if (!(smallest > 0.0)) {
    throw DomainError("lngamma_d: argument (2c+1-d)/2 = " + std::to_string(smallest) +
                      " is not positive");
  }
  double acc = d * (d - 1.0) / 4.0 * std::log(std::numbers::pi);
  for (int j = 1; j <= d; ++j) acc += std::lgamma((2.0 * c + 1.0 - j) / 2.0);
  return acc;
}

double logpdf_mvnormal(const Vector& y, const Vector& mean, const Matrix& cov) {
  return GaussianDensity::from_covariance(mean, cov).logpdf(y);
}

GaussianDensity GaussianDensity::from_covariance(Vector mean, const Matrix& cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DomainError("covariance shape does not match mean");
  }
  GaussianDensity g;
  g.factor_ = cholesky_lower(cov, "covariance");
  g.mean_ = std::move(mean);
  g.factor_is_precision_ = false;
  g.log_norm_ = -0.5 * static_cast<double>(g.mean_.size()) * kLog2Pi -
                g.factor_.diagonal().array().log().sum();
  return g;
}

GaussianDensity GaussianDensity::from_precision_factor(Vector mean, Matrix precision_lower) {
  if (precision_lower.rows() != mean.size() || precision_lower.cols() != mean.size()) {
    throw DomainError("precision factor shape does not match mean");
  }
  GaussianDensity g;
  g.mean_ = std::move(mean);
  g.factor_ = std::move(precision_lower);
  g.factor_is_precision_ = true;
  g.log_norm_ = -0.5 * static_cast<double>(g.mean_.size()) * kLog2Pi +
                g.factor_.diagonal().array().log().sum();
  return g;
}

double GaussianDensity::logpdf(const Vector& y) const {
  const Vector centred = y - mean_;
  double quad;
  if (factor_is_precision_) {
    quad = (factor_.triangularView<Eigen::Lower>().transpose() * centred).squaredNorm();
  } else {
    quad = factor_.triangularView<Eigen::Lower>().solve(centred).squaredNorm();
  }
  return log_norm_ - 0.5 * quad;
}

void GaussianDensity::logpdf_rows(const Matrix& rows, Eigen::Ref<Vector> out) const {
  Matrix centred = rows.rowwise() - mean_.transpose();
  if (factor_is_precision_) {
    // (y - μ)ᵀ L Lᵀ (y - μ) = ‖(y - μ)ᵀ L‖²
    const Matrix z = centred * factor_.triangularView<Eigen::Lower>();
    out = (log_norm_ - 0.5 * z.rowwise().squaredNorm().array()).matrix();
  } else {
    const Matrix z = factor_.triangularView<Eigen::Lower>().solve(centred.transpose());
    out = (log_norm_ - 0.5 * z.colwise().squaredNorm().transpose().array()).matrix();
  }
}

double log_sum_exp(std::span<const double> values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace gmix
