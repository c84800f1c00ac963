#include <doctest.h>

#include <numeric>

#include "gmix/error.hpp"
#include "gmix/postproc.hpp"
#include "gmix/synthdata.hpp"
#include "support.hpp"

using namespace gmix;

namespace {

SweepRecord record_with_counts(std::vector<int> counts) {
  SweepRecord r;
  r.nonempty = static_cast<int>(std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }));
  r.counts = std::move(counts);
  return r;
}

// Two well separated components in d = 2; labels swapped on odd sweeps when
// `switching`, with a little jitter on every mean.
ChainTrace two_component_trace(int sweeps, bool switching, RngStream& rng) {
  ChainTrace trace;
  trace.components = 2;
  trace.dim = 2;
  trace.observations = 6;
  for (int t = 0; t < sweeps; ++t) {
    SweepRecord r;
    r.sweep = t;
    Matrix means(2, 2);
    means << 0.0, 5.0, 0.0, 5.0;
    for (int k = 0; k < 4; ++k) means(k % 2, k / 2) += 0.1 * rng.normal();
    r.weights = Vector(2);
    r.weights << 0.3, 0.7;
    r.counts = {2, 4};
    r.allocations = {0, 0, 1, 1, 1, 1};
    const bool swap = switching && rng.uniform() < 0.5;
    if (swap) {
      means.col(0).swap(means.col(1));
      std::swap(r.weights(0), r.weights(1));
      std::swap(r.counts[0], r.counts[1]);
      for (int& z : r.allocations) z = 1 - z;
    }
    r.means = means;
    r.log_det_cov = Vector::Zero(2);
    r.nonempty = 2;
    trace.records.push_back(std::move(r));
  }
  return trace;
}

// Hubert-Arabie index by explicit enumeration of pairs.
double ari_by_pairs(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0, only_a = 0, only_b = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      only_a += sa;
      only_b += sb;
      ++total;
    }
  }
  const double expected = only_a * only_b / total;
  return (both - expected) / (0.5 * (only_a + only_b) - expected);
}

}  // namespace

TEST_CASE("non-empty cluster counts") {
  ChainTrace trace;
  trace.components = 4;
  for (auto c : {std::vector{1, 2, 3, 0}, {4, 0, 1, 1}, {5, 0, 0, 1}, {2, 2, 1, 1}}) trace.records.push_back(record_with_counts(c));
  const auto s = count_nonempty(trace);
  CHECK(s.per_sweep == std::vector<int>{3, 3, 2, 4});
  CHECK(s.mode == 3);
  CHECK(s.mode_frequency == 2);
  CHECK(s.mean == doctest::Approx(3.0));

  ChainTrace hand;
  for (int g : {3, 3, 2, 3}) {
    std::vector<int> c(5, 0);
    std::fill_n(c.begin(), g, 4);
    hand.records.push_back(record_with_counts(c));
  }
  const auto h = count_nonempty(hand);
  CHECK(h.mode == 3);
  CHECK(h.mode_frequency == 3);
  CHECK(h.mean == doctest::Approx(2.75));
  CHECK(h.min == 2);
  CHECK(h.max == 3);

  ChainTrace tie;
  for (int g : {4, 2, 4, 2}) tie.records.push_back(record_with_counts(std::vector<int>(static_cast<std::size_t>(g), 1)));
  CHECK(count_nonempty(tie).mode == 2);

  CHECK_THROWS_AS(count_nonempty(ChainTrace{}), EmptyResult);

  const std::vector<ClusterCountStats> reps{h, s};
  const auto r = summarize_replicates(reps);
  CHECK(r.modes == std::vector<int>{3, 3});
  CHECK(r.mean_of_means == doctest::Approx(2.875));
}

TEST_CASE("adjusted Rand index") {
  const std::vector<int> a{1, 1, 2, 2, 2}, b{1, 1, 1, 2, 2};
  CHECK(adjusted_rand(a, b) == doctest::Approx(ari_by_pairs(a, b)).epsilon(1e-12));
  CHECK(adjusted_rand(a, b) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(adjusted_rand(a, a) == doctest::Approx(1.0));

  const std::vector<int> one(6, 0);
  std::vector<int> singletons(6);
  std::iota(singletons.begin(), singletons.end(), 0);
  CHECK(adjusted_rand(one, singletons) == doctest::Approx(0.0).scale(1.0));

  RngStream rng(40, 0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> x(30), y(30);
    for (auto& v : x) v = static_cast<int>(rng.uniform_index(4));
    for (auto& v : y) v = static_cast<int>(rng.uniform_index(3));
    const double r = adjusted_rand(x, y);
    REQUIRE(r == doctest::Approx(adjusted_rand(y, x)).epsilon(1e-12));
    REQUIRE(r == doctest::Approx(ari_by_pairs(x, y)).epsilon(1e-9));
    REQUIRE(r <= 1.0 + 1e-12);
    std::vector<int> renamed(x);
    for (auto& v : renamed) v = 17 - 3 * v;
    REQUIRE(adjusted_rand(renamed, y) == doctest::Approx(r).epsilon(1e-12));
  }
  CHECK_THROWS_AS(adjusted_rand(a, std::vector<int>{1, 2}), DomainError);
}

TEST_CASE("relabeling undoes label switching") {
  RngStream rng(41, 0);
  SUBCASE("no switching gives the identity") {
    const auto trace = two_component_trace(200, false, rng);
    const auto rel = relabel_pointprocess(trace, 2);
    CHECK(rel.valid_fraction == doctest::Approx(1.0));
    // Centroids are matched back to labels by nearest naive mean.
    for (std::size_t k = 0; k < rel.assignment.size(); ++k) CHECK(rel.assignment[k][0] != rel.assignment[k][1]);
    const int c0 = rel.assignment[0][0];
    for (const auto& a : rel.assignment) CHECK(a[0] == c0);
    Vector naive = Vector::Zero(2);
    for (const auto& r : trace.records) naive += r.means.col(0);
    naive /= 200.0;
    CHECK((rel.components[static_cast<std::size_t>(c0)].mean_mean - naive).norm() < 1e-12);
  }
  SUBCASE("switched trace") {
    const auto trace = two_component_trace(400, true, rng);
    Vector naive = Vector::Zero(2);
    for (const auto& r : trace.records) naive += r.means.col(0);
    naive /= 400.0;
    CHECK(naive.norm() > 1.0);
    CHECK((naive - Vector::Constant(2, 5.0)).norm() > 1.0);

    const auto rel = relabel_pointprocess(trace, 2);
    CHECK(rel.valid_fraction == doctest::Approx(1.0));
    std::vector<double> firsts;
    for (const auto& c : rel.components) firsts.push_back(c.mean_mean(0));
    std::sort(firsts.begin(), firsts.end());
    CHECK(firsts[0] == doctest::Approx(0.0).scale(1.0).epsilon(0.03));
    CHECK(firsts[1] == doctest::Approx(5.0).epsilon(0.01));
    for (const auto& c : rel.components) CHECK(c.mean_sd.maxCoeff() < 0.2);

    const auto z = map_partition(trace, &rel);
    CHECK(adjusted_rand(z, std::vector<int>{0, 0, 1, 1, 1, 1}) == doctest::Approx(1.0));
  }
  SUBCASE("a fixed relabeling of every sweep does not matter") {
    const auto trace = two_component_trace(200, true, rng);
    ChainTrace flipped = trace;
    for (auto& r : flipped.records) {
      r.means.col(0).swap(r.means.col(1));
      std::swap(r.counts[0], r.counts[1]);
      for (int& z : r.allocations) z = 1 - z;
    }
    const auto a = relabel_pointprocess(trace, 2);
    const auto b = relabel_pointprocess(flipped, 2);
    auto sorted_means = [](const RelabeledSummary& s) {
      std::vector<double> v;
      for (const auto& c : s.components) v.push_back(c.mean_mean(0) + 10 * c.mean_mean(1));
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto ma = sorted_means(a), mb = sorted_means(b);
    for (std::size_t k = 0; k < ma.size(); ++k) CHECK(ma[k] == doctest::Approx(mb[k]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(relabel_pointprocess(two_component_trace(10, false, rng), 3), EmptyResult);
}

TEST_CASE("modal partition") {
  ChainTrace trace;
  trace.components = 3;
  trace.observations = 3;
  auto add = [&](std::vector<int> z) {
    SweepRecord r;
    r.allocations = std::move(z);
    trace.records.push_back(std::move(r));
  };
  add({2, 0, 1});
  CHECK(map_partition(trace) == std::vector<int>{2, 0, 1});
  add({1, 0, 2});
  CHECK(map_partition(trace) == std::vector<int>{1, 0, 1});
  add({2, 2, 1});
  CHECK(map_partition(trace) == std::vector<int>{2, 0, 1});
}

TEST_CASE("identified means of a high-dimensional benchmark fit") {
  ScenarioSpec spec;
  spec.d = 50;
  spec.n = 1000;
  spec.seed = 3;
  const auto sim = simulate_scenario(spec);
  PriorConfig cfg;
  cfg.max_components = 3;
  cfg.cov_mode = CovPriorMode::determinant;
  const auto prior = resolve_prior(cfg, sim.data);
  InitSpec init;
  init.kind = InitSpec::Kind::allocations;
  init.allocations = sim.labels;
  ChainOptions opt;
  opt.sweeps = 200;
  opt.burn_in = 20;
  opt.permute = true;
  RngStream rng(3, 1000);
  const auto trace = run_chain(rng, sim.data, prior, init, opt);
  const auto rel = relabel_pointprocess(trace, 3);
  CHECK(rel.valid_fraction > 0.99);

  const Matrix truth = scenario_means(50);
  for (int g = 0; g < 3; ++g) {
    double best = 1e300;
    for (const auto& c : rel.components) {
      const double rms = std::sqrt((c.mean_mean - truth.col(g)).squaredNorm() / 50.0);
      best = std::min(best, rms);
    }
    CAPTURE(g);
    CHECK(best < 0.1);
  }
  CHECK(adjusted_rand(map_partition(trace, &rel), sim.labels) > 0.99);
}
