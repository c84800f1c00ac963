#include "gmix/priors.hpp"

#include <cmath>
#include <cstdio>

#include "gmix/error.hpp"

namespace gmix {
namespace {

void require_r2(double r2) {
  if (!(r2 > 0.0 && r2 < 1.0)) {
    throw DomainError("R² target " + std::to_string(r2) + " must lie in (0, 1)");
  }
}

void require_nonconstant(const DataSet& data) {
  for (int l = 0; l < data.d(); ++l) {
    if (!(data.ranges()(l) > 0.0)) {
      throw ValidationError("column " + std::to_string(l) + " is constant (range 0)");
    }
  }
}

// S_y, ridge-repaired when singular.
Matrix usable_covariance(const DataSet& data, std::vector<std::string>& warnings) {
  Matrix s = data.covariance();
  bool singular = data.n() <= data.d();
  if (!singular) {
    Eigen::LLT<Matrix> llt(s);
    singular = llt.info() != Eigen::Success;
  }
  if (singular) {
    const double ridge = 1e-8 * s.diagonal().mean();
    s.diagonal().array() += ridge;
    char buf[128];
    std::snprintf(buf, sizeof buf, "empirical covariance is singular (n = %d, d = %d); added ridge %.3g·I",
                  data.n(), data.d(), ridge);
    warnings.emplace_back(buf);
  }
  return s;
}

}  // namespace

std::string to_string(CovPriorMode mode) {
  switch (mode) {
    case CovPriorMode::hierarchical: return "hierarchical";
    case CovPriorMode::trace: return "trace";
    case CovPriorMode::determinant: return "determinant";
  }
  return "?";
}

CovPriorMode parse_cov_prior_mode(const std::string& text) {
  if (text == "hierarchical") return CovPriorMode::hierarchical;
  if (text == "trace") return CovPriorMode::trace;
  if (text == "determinant") return CovPriorMode::determinant;
  throw ValidationError("unknown covariance prior mode '" + text + "'");
}

void PriorConfig::validate(int d) const {
  if (max_components < 1) throw ValidationError("max_components must be >= 1");
  if (!(e0 > 0.0)) throw ValidationError("e0 must be positive");
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  if (!(nu1 > 0.0) || !(nu2 > 0.0)) throw ValidationError("nu1 and nu2 must be positive");
  if (m0 && m0->size() != d) throw ValidationError("m0 has the wrong dimension");
  const double c = c0.value_or(default_c0(d));
  if (!(c > (d - 1.0) / 2.0)) throw ValidationError("c0 must exceed (d-1)/2");
  if (cov_mode != CovPriorMode::hierarchical) {
    if (!(r2 > 0.0 && r2 < 1.0)) throw ValidationError("r2 must lie in (0, 1)");
    if (!(c > (d + 1.0) / 2.0)) {
      throw ValidationError("trace/determinant scaling requires c0 > (d+1)/2");
    }
  }
}

double default_c0(int d) { return 2.5 + (d - 1.0) / 2.0; }

double phi_tr(double r2, double c0, int d) {
  require_r2(r2);
  const double excess = c0 - (d + 1.0) / 2.0;
  if (!(excess > 0.0)) throw DomainError("phi_tr requires c0 > (d+1)/2");
  return (1.0 - r2) * excess;
}

double phi_det(double r2, double c0, int d) {
  require_r2(r2);
  if (!(c0 > (d + 1.0) / 2.0)) throw DomainError("phi_det requires c0 > (d+1)/2");
  const double log_ratio = lngamma_d(d, c0) - lngamma_d(d, c0 - 1.0);
  return std::exp((std::log1p(-r2) + log_ratio) / d);
}

CovariancePrior build_cov_prior(const PriorConfig& config, const DataSet& data) {
  const int d = data.d();
  config.validate(d);
  if (data.n() < 2) throw ValidationError("need at least two observations");
  require_nonconstant(data);

  CovariancePrior prior;
  prior.mode = config.cov_mode;
  prior.c0 = config.c0.value_or(default_c0(d));
  switch (config.cov_mode) {
    case CovPriorMode::hierarchical: {
      prior.g0 = 0.5 + (d - 1.0) / 2.0;
      const Vector inv_range_sq = data.ranges().array().square().inverse();
      prior.G0 = (100.0 * prior.g0 / prior.c0) * inv_range_sq.asDiagonal().toDenseMatrix();
      prior.C0 = prior.g0 * spd_inverse(prior.G0, "G0");
      break;
    }
    case CovPriorMode::trace:
      prior.phi = phi_tr(config.r2, prior.c0, d);
      prior.C0 = prior.phi * usable_covariance(data, prior.warnings);
      break;
    case CovPriorMode::determinant:
      prior.phi = phi_det(config.r2, prior.c0, d);
      prior.C0 = prior.phi * usable_covariance(data, prior.warnings);
      break;
  }
  return prior;
}

ResolvedPrior resolve_prior(const PriorConfig& config, const DataSet& data) {
  ResolvedPrior out;
  out.cov = build_cov_prior(config, data);
  out.components = config.max_components;
  out.e0 = config.e0;
  out.mean.center = config.mean_center;
  out.mean.m0 = config.m0.value_or(data.medians());
  out.mean.range_sq = data.ranges().array().square();
  out.mean.shrinkage = config.shrinkage;
  out.mean.lambda = config.lambda;
  out.mean.nu1 = config.nu1;
  out.mean.nu2 = config.nu2;
  return out;
}

MixtureMoments mixture_moments(std::span<const double> weights, const std::vector<Vector>& means,
                               const std::vector<Matrix>& covs) {
  if (weights.empty() || weights.size() != means.size() || weights.size() != covs.size()) {
    throw DomainError("mixture_moments: weights, means and covs must have equal non-zero length");
  }
  const Eigen::Index d = means.front().size();
  MixtureMoments m{Vector::Zero(d), Matrix::Zero(d, d)};
  for (std::size_t g = 0; g < weights.size(); ++g) m.mean += weights[g] * means[g];
  for (std::size_t g = 0; g < weights.size(); ++g) {
    const Vector dev = means[g] - m.mean;
    m.cov += weights[g] * (covs[g] + dev * dev.transpose());
  }
  return m;
}

namespace {

Matrix within_cov(std::span<const double> weights, const std::vector<Matrix>& covs) {
  if (weights.empty() || weights.size() != covs.size()) {
    throw DomainError("weights and covs must have equal non-zero length");
  }
  Matrix w = Matrix::Zero(covs.front().rows(), covs.front().cols());
  for (std::size_t g = 0; g < weights.size(); ++g) w += weights[g] * covs[g];
  return w;
}

}  // namespace

double r2_tr(std::span<const double> weights, const std::vector<Matrix>& covs,
             const Matrix& total_cov) {
  return 1.0 - within_cov(weights, covs).trace() / total_cov.trace();
}

double r2_det(std::span<const double> weights, const std::vector<Matrix>& covs,
              const Matrix& total_cov) {
  const double log_within = log_det_from_chol(cholesky_lower(within_cov(weights, covs), "within-group covariance"));
  const double log_total = log_det_from_chol(cholesky_lower(total_cov, "total covariance"));
  return 1.0 - std::exp(log_within - log_total);
}

}  // namespace gmix
