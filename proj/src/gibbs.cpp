#include "gmix/gibbs.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "gmix/distributions.hpp"
#include "gmix/error.hpp"
#include "gmix/kmeans.hpp"

namespace gmix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Lower L with L Lᵀ = (2·rate)⁻¹, via the reversed Cholesky factorization:
// if J (2·rate) J = M Mᵀ then (2·rate)⁻¹ = (J M⁻ᵀ J)(J M⁻ᵀ J)ᵀ with J M⁻ᵀ J
// lower triangular.
Matrix scale_factor_from_rate(const Matrix& rate) {
  const Eigen::Index d = rate.rows();
  const Matrix reversed = (2.0 * rate).reverse();
  const Matrix m = cholesky_lower(reversed, "Wishart rate");
  const Matrix m_inv = m.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  Matrix l = m_inv.transpose().reverse();
  return l.triangularView<Eigen::Lower>();
}

std::vector<std::vector<int>> members_by_component(const MixtureState& state) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(state.components()));
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    members[static_cast<std::size_t>(state.z[i])].push_back(static_cast<int>(i));
  }
  return members;
}

Vector prior_mean_variances(const MixtureState& state, const ResolvedPrior& prior) {
  return state.lambda.cwiseProduct(prior.mean.range_sq);
}

Vector initial_lambda(const ResolvedPrior& prior, int d) { return Vector::Constant(d, prior.mean.lambda); }

void set_initial_hypers(MixtureState& state, const ResolvedPrior& prior, int d) {
  state.b0 = prior.mean.m0;
  state.C0 = prior.cov.C0;
  state.lambda = initial_lambda(prior, d);
}

}  // namespace

int MixtureState::nonempty() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
}

Matrix MixtureState::precision(int g) const {
  const Matrix& k = precision_chol[static_cast<std::size_t>(g)];
  return k * k.transpose();
}

Matrix MixtureState::covariance(int g) const {
  const Matrix& k = precision_chol[static_cast<std::size_t>(g)];
  const Matrix k_inv = k.triangularView<Eigen::Lower>().solve(Matrix::Identity(k.rows(), k.cols()));
  return k_inv.transpose() * k_inv;
}

double MixtureState::log_det_cov(int g) const {
  return -2.0 * precision_chol[static_cast<std::size_t>(g)].diagonal().array().log().sum();
}

void recompute_statistics(MixtureState& state, const DataSet& data) {
  const int g_count = state.components();
  state.counts.assign(static_cast<std::size_t>(g_count), 0);
  state.sums = Matrix::Zero(data.d(), g_count);
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    const int g = state.z[i];
    ++state.counts[static_cast<std::size_t>(g)];
    state.sums.col(g) += data.y().row(static_cast<Eigen::Index>(i)).transpose();
  }
}

double statistics_discrepancy(const MixtureState& state, const DataSet& data) {
  MixtureState fresh;
  fresh.log_weights = state.log_weights;
  fresh.z = state.z;
  recompute_statistics(fresh, data);
  double worst = 0.0;
  for (std::size_t g = 0; g < fresh.counts.size(); ++g) {
    worst = std::max(worst, std::abs(static_cast<double>(fresh.counts[g] - state.counts[g])));
  }
  if (state.sums.size() != fresh.sums.size()) return std::numeric_limits<double>::infinity();
  return std::max(worst, (fresh.sums - state.sums).cwiseAbs().maxCoeff());
}

void step_allocations(RngStream& rng, MixtureState& state, const DataSet& data,
                      const AllocationOptions& options) {
  const int n = data.n();
  const int g_count = state.components();
  Matrix log_prob(n, g_count);
  const int workers = std::max(1, options.workers);

#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
  for (int g = 0; g < g_count; ++g) {
    if (state.log_weights(g) == kNegInf) {
      log_prob.col(g).setConstant(kNegInf);
      continue;
    }
    const auto density = GaussianDensity::from_precision_factor(
        state.means.col(g), state.precision_chol[static_cast<std::size_t>(g)]);
    density.logpdf_rows(data.y(), log_prob.col(g));
    log_prob.col(g).array() += state.log_weights(g);
  }

  const std::uint64_t key = rng();
  const int block = std::max(1, options.block_size);
  const int blocks = (n + block - 1) / block;
  state.z.resize(static_cast<std::size_t>(n));
  int failed = -1;

#pragma omp parallel for num_threads(workers) schedule(static) if (workers > 1)
  for (int b = 0; b < blocks; ++b) {
    RngStream sub(key, static_cast<std::uint64_t>(b));
    std::vector<double> cumulative(static_cast<std::size_t>(g_count));
    const int end = std::min(n, (b + 1) * block);
    for (int i = b * block; i < end; ++i) {
      const double top = log_prob.row(i).maxCoeff();
      if (!std::isfinite(top)) {
#pragma omp critical
        failed = failed < 0 ? i : std::min(failed, i);
        sub.uniform();
        continue;
      }
      double total = 0.0;
      for (int g = 0; g < g_count; ++g) {
        total += std::exp(log_prob(i, g) - top);
        cumulative[static_cast<std::size_t>(g)] = total;
      }
      const double u = sub.uniform() * total;
      int pick = g_count - 1;
      for (int g = 0; g < g_count; ++g) {
        if (u < cumulative[static_cast<std::size_t>(g)]) {
          pick = g;
          break;
        }
      }
      state.z[static_cast<std::size_t>(i)] = pick;
    }
  }
  if (failed >= 0) {
    throw NumericalFailure("observation " + std::to_string(failed) +
                           " has zero density under every component");
  }
  recompute_statistics(state, data);
}

Vector step_weights(RngStream& rng, const std::vector<int>& counts, double e0) {
  std::vector<double> concentration(counts.size());
  for (std::size_t g = 0; g < counts.size(); ++g) concentration[g] = e0 + counts[g];
  return sample_dirichlet_log(rng, concentration);
}

void step_means(RngStream& rng, MixtureState& state, const DataSet& /*data*/,
                const ResolvedPrior& prior) {
  const int d = state.dim();
  const Vector prior_var = prior_mean_variances(state, prior);
  const Vector prior_prec = prior_var.cwiseInverse();
  const Vector prior_sd = prior_var.cwiseSqrt();
  for (int g = 0; g < state.components(); ++g) {
    const int n_g = state.counts[static_cast<std::size_t>(g)];
    if (n_g == 0) {
      for (int l = 0; l < d; ++l) state.means(l, g) = state.b0(l) + prior_sd(l) * rng.normal();
      continue;
    }
    const Matrix& k = state.precision_chol[static_cast<std::size_t>(g)];
    const Matrix omega = k * k.transpose();
    Matrix post_prec = static_cast<double>(n_g) * omega;
    post_prec.diagonal() += prior_prec;
    const Vector rhs = prior_prec.cwiseProduct(state.b0) + omega * state.sums.col(g);
    const Matrix l = cholesky_lower(post_prec, "mean posterior precision");
    const Vector centre =
        l.triangularView<Eigen::Lower>().transpose().solve(l.triangularView<Eigen::Lower>().solve(rhs));
    Vector noise(d);
    for (int j = 0; j < d; ++j) noise(j) = rng.normal();
    state.means.col(g) = centre + l.triangularView<Eigen::Lower>().transpose().solve(noise);
  }
}

void step_covariances(RngStream& rng, MixtureState& state, const DataSet& data,
                      const ResolvedPrior& prior) {
  const double c0 = prior.cov.c0;
  const Matrix prior_factor = scale_factor_from_rate(state.C0);
  const auto members = members_by_component(state);
  const int d = state.dim();
  state.precision_chol.resize(static_cast<std::size_t>(state.components()));
  for (int g = 0; g < state.components(); ++g) {
    const auto& idx = members[static_cast<std::size_t>(g)];
    if (idx.empty()) {
      state.precision_chol[static_cast<std::size_t>(g)] = sample_wishart_factor(rng, c0, prior_factor);
      continue;
    }
    Matrix centred(static_cast<Eigen::Index>(idx.size()), d);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      centred.row(static_cast<Eigen::Index>(r)) = data.y().row(idx[r]) - state.means.col(g).transpose();
    }
    Matrix rate = state.C0;
    rate.selfadjointView<Eigen::Lower>().rankUpdate(centred.transpose(), 0.5);
    rate = rate.selfadjointView<Eigen::Lower>();
    const double shape = c0 + 0.5 * static_cast<double>(idx.size());
    state.precision_chol[static_cast<std::size_t>(g)] =
        sample_wishart_factor(rng, shape, scale_factor_from_rate(rate));
  }
}

void step_hypers(RngStream& rng, MixtureState& state, const ResolvedPrior& prior) {
  const int g_count = state.components();
  const int d = state.dim();
  if (prior.cov.mode == CovPriorMode::hierarchical) {
    Matrix rate = prior.cov.G0;
    for (int g = 0; g < g_count; ++g) rate += state.precision(g);
    symmetrize(rate);
    const double shape = prior.cov.g0 + g_count * prior.cov.c0;
    const Matrix k = sample_wishart_factor(rng, shape, scale_factor_from_rate(rate));
    state.C0 = k * k.transpose();
    symmetrize(state.C0);
  }
  if (prior.mean.center == MeanCenterMode::sampled) {
    const Vector avg = state.means.rowwise().mean();
    const Vector var = prior_mean_variances(state, prior) / static_cast<double>(g_count);
    for (int l = 0; l < d; ++l) state.b0(l) = avg(l) + std::sqrt(var(l)) * rng.normal();
  }
  if (prior.mean.shrinkage == ShrinkageMode::gamma) {
    for (int l = 0; l < d; ++l) {
      double ss = 0.0;
      for (int g = 0; g < g_count; ++g) {
        const double dev = state.means(l, g) - state.b0(l);
        ss += dev * dev;
      }
      ss /= prior.mean.range_sq(l);
      state.lambda(l) = sample_gig(rng, prior.mean.nu1 - 0.5 * g_count, 2.0 * prior.mean.nu2, ss);
    }
  }
}

void apply_permutation(MixtureState& state, const std::vector<int>& perm) {
  const int g_count = state.components();
  if (static_cast<int>(perm.size()) != g_count) throw DomainError("permutation has wrong size");
  std::vector<int> inverse(perm.size(), -1);
  for (int g = 0; g < g_count; ++g) {
    const int src = perm[static_cast<std::size_t>(g)];
    if (src < 0 || src >= g_count || inverse[static_cast<std::size_t>(src)] != -1) {
      throw DomainError("not a permutation");
    }
    inverse[static_cast<std::size_t>(src)] = g;
  }
  Vector log_w(g_count);
  Matrix means(state.dim(), g_count);
  std::vector<Matrix> chol(static_cast<std::size_t>(g_count));
  for (int g = 0; g < g_count; ++g) {
    const int src = perm[static_cast<std::size_t>(g)];
    log_w(g) = state.log_weights(src);
    means.col(g) = state.means.col(src);
    chol[static_cast<std::size_t>(g)] = std::move(state.precision_chol[static_cast<std::size_t>(src)]);
  }
  state.log_weights = std::move(log_w);
  state.means = std::move(means);
  state.precision_chol = std::move(chol);
  for (int& label : state.z) label = inverse[static_cast<std::size_t>(label)];
  if (!state.counts.empty()) {
    std::vector<int> counts(static_cast<std::size_t>(g_count));
    Matrix sums(state.sums.rows(), g_count);
    for (int g = 0; g < g_count; ++g) {
      const int src = perm[static_cast<std::size_t>(g)];
      counts[static_cast<std::size_t>(g)] = state.counts[static_cast<std::size_t>(src)];
      sums.col(g) = state.sums.col(src);
    }
    state.counts = std::move(counts);
    state.sums = std::move(sums);
  }
}

std::vector<int> step_permute(RngStream& rng, MixtureState& state) {
  std::vector<int> perm(static_cast<std::size_t>(state.components()));
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  }
  apply_permutation(state, perm);
  return perm;
}

double log_posterior(const MixtureState& state, const DataSet& data, const ResolvedPrior& prior) {
  const int g_count = state.components();
  const int d = state.dim();
  double lp = 0.0;

  std::vector<GaussianDensity> densities;
  densities.reserve(static_cast<std::size_t>(g_count));
  for (int g = 0; g < g_count; ++g) {
    densities.push_back(GaussianDensity::from_precision_factor(
        state.means.col(g), state.precision_chol[static_cast<std::size_t>(g)]));
  }
  for (std::size_t i = 0; i < state.z.size(); ++i) {
    const int g = state.z[i];
    lp += state.log_weights(g) +
          densities[static_cast<std::size_t>(g)].logpdf(data.y().row(static_cast<Eigen::Index>(i)).transpose());
  }

  const double e0 = prior.e0;
  lp += std::lgamma(g_count * e0) - g_count * std::lgamma(e0) + (e0 - 1.0) * state.log_weights.sum();

  const Vector prior_var = prior_mean_variances(state, prior);
  const auto mean_prior = GaussianDensity::from_covariance(state.b0, prior_var.asDiagonal().toDenseMatrix());
  const WishartParams cov_prior{prior.cov.c0, state.C0};
  for (int g = 0; g < g_count; ++g) {
    lp += mean_prior.logpdf(state.means.col(g));
    lp += logpdf_wishart(state.precision(g), cov_prior);
  }
  if (prior.cov.mode == CovPriorMode::hierarchical) {
    lp += logpdf_wishart(state.C0, WishartParams{prior.cov.g0, prior.cov.G0});
  }
  if (prior.mean.shrinkage == ShrinkageMode::gamma) {
    const double a = prior.mean.nu1;
    const double b = prior.mean.nu2;
    for (int l = 0; l < d; ++l) {
      lp += a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(state.lambda(l)) - b * state.lambda(l);
    }
  }
  return lp;
}

MixtureState prior_draw(RngStream& rng, const DataSet& data, const ResolvedPrior& prior) {
  const int d = data.d();
  const int g_count = prior.components;
  MixtureState state;
  set_initial_hypers(state, prior, d);
  state.log_weights = step_weights(rng, std::vector<int>(static_cast<std::size_t>(g_count), 0), prior.e0);
  state.means = Matrix::Zero(d, g_count);
  state.counts.assign(static_cast<std::size_t>(g_count), 0);
  state.sums = Matrix::Zero(d, g_count);
  step_means(rng, state, data, prior);
  step_covariances(rng, state, data, prior);
  return state;
}

MixtureState state_from_allocations(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                                    std::vector<int> z) {
  const int d = data.d();
  const int g_count = prior.components;
  if (static_cast<int>(z.size()) != data.n()) {
    throw ValidationError("initial allocations have length " + std::to_string(z.size()) +
                          ", expected " + std::to_string(data.n()));
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0 || z[i] >= g_count) {
      throw ValidationError("initial allocation " + std::to_string(i) + " is outside [0, G)");
    }
  }
  MixtureState state;
  set_initial_hypers(state, prior, d);
  state.log_weights = Vector::Constant(g_count, -std::log(static_cast<double>(g_count)));
  state.z = std::move(z);
  recompute_statistics(state, data);
  state.means.resize(d, g_count);
  for (int g = 0; g < g_count; ++g) {
    const int n_g = state.counts[static_cast<std::size_t>(g)];
    state.means.col(g) = n_g > 0 ? Vector(state.sums.col(g) / n_g) : state.b0;
  }
  step_covariances(rng, state, data, prior);
  step_means(rng, state, data, prior);
  state.log_weights = step_weights(rng, state.counts, prior.e0);
  step_hypers(rng, state, prior);
  return state;
}

InitSpec InitSpec::parse(const std::string& text) {
  InitSpec spec;
  if (text == "kmeans") {
    spec.kind = Kind::kmeans;
  } else if (text == "prior") {
    spec.kind = Kind::prior_draw;
  } else if (text == "allocations") {
    spec.kind = Kind::allocations;
  } else {
    throw ValidationError("unknown init mode '" + text + "' (kmeans | prior | allocations)");
  }
  return spec;
}

std::string to_string(InitSpec::Kind kind) {
  switch (kind) {
    case InitSpec::Kind::kmeans: return "kmeans";
    case InitSpec::Kind::prior_draw: return "prior";
    case InitSpec::Kind::allocations: return "allocations";
  }
  return "?";
}

std::string snapshot_json(const MixtureState& state) {
  nlohmann::json j;
  j["log_weights"] = std::vector<double>(state.log_weights.data(), state.log_weights.data() + state.log_weights.size());
  std::vector<std::vector<double>> means;
  for (int g = 0; g < state.means.cols(); ++g) {
    means.emplace_back(state.means.col(g).data(), state.means.col(g).data() + state.means.rows());
  }
  j["means"] = means;
  std::vector<double> log_dets;
  for (int g = 0; g < static_cast<int>(state.precision_chol.size()); ++g) log_dets.push_back(state.log_det_cov(g));
  j["log_det_cov"] = log_dets;
  j["counts"] = state.counts;
  j["z"] = state.z;
  j["b0"] = std::vector<double>(state.b0.data(), state.b0.data() + state.b0.size());
  j["lambda"] = std::vector<double>(state.lambda.data(), state.lambda.data() + state.lambda.size());
  return j.dump();
}

SweepRecord make_record(const MixtureState& state, int sweep, const ChainOptions& options) {
  const int g_count = state.components();
  const int d = state.dim();
  SweepRecord rec;
  rec.sweep = sweep;
  rec.weights = state.weights();
  rec.means = state.means;
  rec.log_det_cov.resize(g_count);
  rec.counts = state.counts;
  rec.nonempty = state.nonempty();
  const bool need_cov = options.record_cov_diag || options.record_full_cov;
  if (options.record_cov_diag) rec.cov_diag.resize(d, g_count);
  for (int g = 0; g < g_count; ++g) {
    rec.log_det_cov(g) = state.log_det_cov(g);
    if (!need_cov) continue;
    const Matrix& k = state.precision_chol[static_cast<std::size_t>(g)];
    const Matrix k_inv = k.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
    if (options.record_cov_diag) rec.cov_diag.col(g) = k_inv.colwise().squaredNorm().transpose();
    if (options.record_full_cov) rec.full_cov.push_back(k_inv.transpose() * k_inv);
  }
  if (options.record_allocations) rec.allocations = state.z;
  return rec;
}

ChainTrace run_chain(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                     const InitSpec& init, const ChainOptions& options, TraceSink* sink,
                     const ProgressFn& progress) {
  MixtureState state;
  switch (init.kind) {
    case InitSpec::Kind::kmeans: {
      auto km = kmeans(data.y(), prior.components, rng, init.kmeans_restarts);
      state = state_from_allocations(rng, data, prior, std::move(km.labels));
      break;
    }
    case InitSpec::Kind::prior_draw:
      state = prior_draw(rng, data, prior);
      break;
    case InitSpec::Kind::allocations:
      state = state_from_allocations(rng, data, prior, init.allocations);
      break;
  }
  return run_chain_from(rng, data, prior, std::move(state), options, sink, progress);
}

ChainTrace run_chain_from(RngStream& rng, const DataSet& data, const ResolvedPrior& prior,
                          MixtureState state, const ChainOptions& options, TraceSink* sink,
                          const ProgressFn& progress) {
  if (options.sweeps <= 0) throw ValidationError("number of sweeps must be positive");
  if (options.burn_in < 0) throw ValidationError("burn-in must be non-negative");
  ChainTrace trace;
  trace.components = state.components();
  trace.dim = data.d();
  trace.observations = data.n();
  const int total = options.burn_in + options.sweeps;
  if (options.keep_records) trace.records.reserve(static_cast<std::size_t>(options.sweeps));
  for (int t = 0; t < total; ++t) {
    try {
      step_allocations(rng, state, data, options.allocation);
      state.log_weights = step_weights(rng, state.counts, prior.e0);
      step_means(rng, state, data, prior);
      step_covariances(rng, state, data, prior);
      step_hypers(rng, state, prior);
      if (options.permute) step_permute(rng, state);
    } catch (const NumericalFailure& e) {
      throw ChainError(t, snapshot_json(state), e.what(), true);
    } catch (const NotPositiveDefinite& e) {
      throw ChainError(t, snapshot_json(state), e.what(), true);
    } catch (const DomainError& e) {
      throw ChainError(t, snapshot_json(state), e.what(), true);
    }
    if (t >= options.burn_in) {
      SweepRecord rec = make_record(state, t - options.burn_in, options);
      if (sink) sink->write(rec);
      if (options.keep_records) trace.records.push_back(std::move(rec));
    }
    if (progress) progress(t + 1, total);
  }
  return trace;
}

}  // namespace gmix
