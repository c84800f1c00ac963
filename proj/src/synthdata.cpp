#include "gmix/synthdata.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "gmix/distributions.hpp"
#include "gmix/error.hpp"

namespace gmix {

void ScenarioSpec::validate() const {
  if (d < 1) throw ValidationError("scenario d must be >= 1");
  if (n < 1) throw ValidationError("scenario n must be >= 1");
  if (!(tau > 0.0)) throw ValidationError("scenario tau must be positive");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ValidationError("scenario weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("scenario weights must sum to 1");
}

Matrix scenario_means(int d) {
  Matrix m(d, 3);
  for (int l = 0; l < d; ++l) {
    m(l, 0) = l % 2 == 0 ? 1.0 : 4.0;
    m(l, 1) = 1.0;
    m(l, 2) = 4.0;
  }
  return m;
}

SimulatedData simulate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed, spec.stream);
  const Matrix means = scenario_means(spec.d);
  const double sd = std::sqrt(spec.tau);
  Matrix y(spec.n, spec.d);
  std::vector<int> labels(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const double u = rng.uniform();
    int g = 2;
    if (u < spec.weights[0]) {
      g = 0;
    } else if (u < spec.weights[0] + spec.weights[1]) {
      g = 1;
    }
    labels[static_cast<std::size_t>(i)] = g;
    for (int l = 0; l < spec.d; ++l) y(i, l) = means(l, g) + sd * rng.normal();
  }
  return {DataSet(std::move(y)), std::move(labels)};
}

SimulatedData simulate_two_mean(int n, double eta, double mu1, double mu2, double sigma2,
                                std::uint64_t seed, std::uint64_t stream) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in [0, 1]");
  if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
  RngStream rng(seed, stream);
  const double sd = std::sqrt(sigma2);
  Matrix y(n, 1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int g = rng.uniform() < eta ? 0 : 1;
    labels[static_cast<std::size_t>(i)] = g;
    y(i, 0) = (g == 0 ? mu1 : mu2) + sd * rng.normal();
  }
  return {DataSet(std::move(y)), std::move(labels)};
}

double overlap(const Vector& mean_a, const Vector& mean_b, double tau) {
  if (!(tau > 0.0)) throw DomainError("overlap requires tau > 0");
  if (mean_a.size() != mean_b.size()) throw DomainError("overlap: mean dimensions differ");
  const double delta = (mean_a - mean_b).norm();
  // 2Φ(-x) = erfc(x / √2)
  return std::erfc(delta / (2.0 * std::sqrt(tau)) / std::sqrt(2.0));
}

McEstimate overlap_mc(const Vector& mean_a, const Matrix& cov_a, const Vector& mean_b,
                      const Matrix& cov_b, RngStream& rng, long draws) {
  if (draws < 2) throw DomainError("overlap_mc needs at least two draws");
  const auto fa = GaussianDensity::from_covariance(mean_a, cov_a);
  const auto fb = GaussianDensity::from_covariance(mean_b, cov_b);
  const Matrix chol_a = cholesky_lower(cov_a, "covariance");
  double sum = 0.0, sum_sq = 0.0;
  for (long k = 0; k < draws; ++k) {
    const Vector y = sample_mvnormal_chol(rng, mean_a, chol_a);
    const double ratio = std::min(1.0, std::exp(fb.logpdf(y) - fa.logpdf(y)));
    sum += ratio;
    sum_sq += ratio * ratio;
  }
  const double m = sum / static_cast<double>(draws);
  const double var = std::max(0.0, sum_sq / static_cast<double>(draws) - m * m);
  return {m, std::sqrt(var / static_cast<double>(draws))};
}

TwoMeanPosterior exact_two_mean_posterior(std::span<const double> y, double eta, double sigma2,
                                          double prior_var) {
  const std::size_t n = y.size();
  if (n > 20) throw DomainError("exact enumeration is limited to n <= 20");
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  if (!(sigma2 > 0.0) || !(prior_var > 0.0)) throw DomainError("variances must be positive");

  const double kappa = sigma2 / prior_var;
  const double log_eta = std::log(eta);
  const double log_rest = std::log1p(-eta);
  const double log_2pi_s2 = std::log(2.0 * M_PI * sigma2);

  // log ∫ Π_{i in group} N(y_i; μ, σ²) N(μ; 0, prior_var) dμ
  const auto group_log_marginal = [&](int count, double s, double ss) {
    return -0.5 * count * log_2pi_s2 - 0.5 * std::log1p(count / kappa) -
           0.5 / sigma2 * (ss - s * s / (kappa + count));
  };

  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> log_w(total);
  std::vector<double> m1(total), m2(total), v1(total), v2(total);
  std::vector<std::uint64_t> masks(total);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    int c1 = 0, c2 = 0;
    double s1 = 0.0, s2 = 0.0, ss1 = 0.0, ss2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) {  // bit set: component 1
        ++c1;
        s1 += y[i];
        ss1 += y[i] * y[i];
      } else {
        ++c2;
        s2 += y[i];
        ss2 += y[i] * y[i];
      }
    }
    log_w[mask] = c1 * log_eta + c2 * log_rest + group_log_marginal(c1, s1, ss1) +
                  group_log_marginal(c2, s2, ss2);
    m1[mask] = s1 / (kappa + c1);
    m2[mask] = s2 / (kappa + c2);
    v1[mask] = sigma2 / (kappa + c1);
    v2[mask] = sigma2 / (kappa + c2);
  }
  const double log_z = log_sum_exp(log_w);
  TwoMeanPosterior out;
  out.log_marginal = log_z;
  out.prob_first.assign(n, 0.0);
  double e1 = 0.0, e2 = 0.0, q1 = 0.0, q2 = 0.0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const double w = std::exp(log_w[mask] - log_z);
    e1 += w * m1[mask];
    e2 += w * m2[mask];
    q1 += w * (v1[mask] + m1[mask] * m1[mask]);
    q2 += w * (v2[mask] + m2[mask] * m2[mask]);
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1U) out.prob_first[i] += w;
    }
  }
  out.mean_mu1 = e1;
  out.mean_mu2 = e2;
  out.var_mu1 = q1 - e1 * e1;
  out.var_mu2 = q2 - e2 * e2;
  return out;
}

void write_dataset_csv(const std::string& path, const DataSet& data, const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  if (labels && static_cast<int>(labels->size()) != data.n()) {
    throw ValidationError("label count does not match data rows");
  }
  for (int l = 0; l < data.d(); ++l) out << (l ? "," : "") << 'y' << (l + 1);
  if (labels) out << ",label";
  out << '\n';
  char buf[32];
  for (int i = 0; i < data.n(); ++i) {
    for (int l = 0; l < data.d(); ++l) {
      std::snprintf(buf, sizeof buf, "%.17g", data.y()(i, l));
      out << (l ? "," : "") << buf;
    }
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw ValidationError("error writing " + path);
}

LoadedData read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool has_label = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (has_label ? 1 : 0);
  if (d == 0) throw ValidationError(path + ": no data columns");
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col < d) {
          values.push_back(std::stod(cell));
        } else if (has_label && col == d) {
          labels.push_back(std::stoi(cell));
        }
      } catch (const std::exception&) {
        throw ValidationError(path + ": bad value '" + cell + "' on data row " + std::to_string(rows + 1));
      }
      ++col;
    }
    if (col != header.size()) {
      throw ValidationError(path + ": row " + std::to_string(rows + 1) + " has " + std::to_string(col) +
                            " fields, expected " + std::to_string(header.size()));
    }
    ++rows;
  }
  Matrix y(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t l = 0; l < d; ++l) {
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = values[i * d + l];
    }
  }
  return {DataSet(std::move(y)), std::move(labels)};
}

}  // namespace gmix
