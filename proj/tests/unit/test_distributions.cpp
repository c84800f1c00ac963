#include <doctest.h>

#include <numbers>

#include "gmix/distributions.hpp"
#include "gmix/error.hpp"
#include "support.hpp"

using namespace gmix;

namespace {

constexpr int kDraws = 100000;

bool within_se(const std::vector<double>& xs, double expected, double k = 3.0) {
  const auto m = testing::moments(xs);
  return std::fabs(m.mean - expected) < k * m.se;
}

}  // namespace

TEST_CASE("gamma moments and the exponential median") {
  RngStream rng(10, 0);
  SUBCASE("shape 0.5, rate 0.5 has mean 1") {
    const auto xs = testing::draws(kDraws, [&] { return sample_gamma(rng, 0.5, 0.5); });
    CHECK(within_se(xs, 1.0));
    CHECK(std::fabs(testing::moments(xs).var - 2.0) < 3 * testing::variance_se(xs));
  }
  SUBCASE("shape 3.7, rate 2") {
    const auto xs = testing::draws(kDraws, [&] { return sample_gamma(rng, 3.7, 2.0); });
    CHECK(within_se(xs, 1.85));
  }
  SUBCASE("exponential median is ln 2") {
    auto xs = testing::draws(kDraws, [&] { return sample_gamma(rng, 1.0, 1.0); });
    std::nth_element(xs.begin(), xs.begin() + kDraws / 2, xs.end());
    // SE of the median: 1/(2 f(m) √n) with f(ln 2) = 1/2.
    CHECK(std::fabs(xs[kDraws / 2] - std::log(2.0)) < 3.0 / std::sqrt(kDraws));
  }
  CHECK_THROWS_AS(sample_gamma(rng, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(sample_gamma(rng, 1.0, -1.0), DomainError);
}

TEST_CASE("log-gamma draws for tiny shapes") {
  RngStream rng(11, 0);
  // E log X = ψ(a); for a = 0.01, ψ(a) ≈ -1/a - γ.
  const double a = 0.01;
  const auto xs = testing::draws(kDraws, [&] { return sample_log_gamma(rng, a); });
  for (double x : xs) REQUIRE(std::isfinite(x));
  const double digamma = -1.0 / a - 0.5772156649015329 + 1.6449340668482264 * a;
  CHECK(within_se(xs, digamma));
}

TEST_CASE("GIG moments agree with quadrature") {
  struct Case {
    double p, a, b;
  };
  for (const Case c : {Case{-1.5, 2.0, 3.0}, Case{0.5, 1.0, 0.2}, Case{-4.5, 1.0, 0.8}, Case{2.0, 0.5, 6.0}}) {
    CAPTURE(c.p);
    CAPTURE(c.b);
    const auto density = [&](double x) { return std::pow(x, c.p - 1.0) * std::exp(-(c.a * x + c.b / x) / 2.0); };
    const double z = testing::integrate_positive(density);
    const double mean = testing::integrate_positive([&](double x) { return x * density(x); }) / z;
    const double inv_mean = testing::integrate_positive([&](double x) { return density(x) / x; }) / z;
    RngStream rng(12, static_cast<std::uint64_t>(c.p * 10 + 100));
    const auto xs = testing::draws(kDraws, [&] { return sample_gig(rng, c.p, c.a, c.b); });
    std::vector<double> inv(xs.size());
    std::transform(xs.begin(), xs.end(), inv.begin(), [](double x) { return 1.0 / x; });
    CHECK(within_se(xs, mean));
    CHECK(within_se(inv, inv_mean));
  }
}

TEST_CASE("GIG degenerate limits") {
  RngStream rng(13, 0);
  SUBCASE("b = 0 is Gamma(p, a/2)") {
    const auto xs = testing::draws(kDraws, [&] { return sample_gig(rng, 2.0, 3.0, 0.0); });
    CHECK(within_se(xs, 2.0 / 1.5));
  }
  SUBCASE("b -> 0 approaches the same limit") {
    const auto xs = testing::draws(kDraws, [&] { return sample_gig(rng, 2.0, 3.0, 1e-10); });
    CHECK(within_se(xs, 2.0 / 1.5));
  }
  SUBCASE("a = 0 is inverse-Gamma(-p, b/2)") {
    const auto xs = testing::draws(kDraws, [&] { return sample_gig(rng, -3.0, 0.0, 4.0); });
    CHECK(within_se(xs, 2.0 / (3.0 - 1.0)));
  }
  CHECK_THROWS_AS(sample_gig(rng, -1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("Dirichlet draws") {
  RngStream rng(14, 0);
  const std::vector<double> single{5.0};
  CHECK(sample_dirichlet(rng, single)(0) == doctest::Approx(1.0));

  const std::vector<double> sym(4, 0.3);
  std::vector<double> first, sums;
  for (int k = 0; k < kDraws; ++k) {
    const Vector w = sample_dirichlet(rng, sym);
    REQUIRE((w.array() >= 0.0).all());
    sums.push_back(w.sum());
    first.push_back(w(0));
  }
  for (double s : sums) REQUIRE(std::fabs(s - 1.0) < 1e-12);
  CHECK(within_se(first, 0.25));

  const std::vector<double> two{2.0, 2.0};
  const auto xs = testing::draws(kDraws, [&] { return sample_dirichlet(rng, two)(0); });
  CHECK(std::fabs(testing::moments(xs).var - 0.05) < 3 * testing::variance_se(xs));

  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(sample_dirichlet(rng, bad), DomainError);
}

TEST_CASE("Dirichlet log weights stay finite for tiny concentrations") {
  RngStream rng(15, 0);
  const std::vector<double> conc{0.0001, 0.0001, 50.0};
  for (int k = 0; k < 1000; ++k) {
    const Vector lw = sample_dirichlet_log(rng, conc);
    REQUIRE(lw.allFinite());
    REQUIRE(std::fabs(std::log(lw.array().exp().sum())) < 1e-12);
  }
}

TEST_CASE("multivariate normal draws") {
  RngStream rng(16, 0);
  SUBCASE("identity covariance") {
    const int d = 3;
    Matrix acc = Matrix::Zero(d, d);
    for (int k = 0; k < kDraws; ++k) {
      const Vector x = sample_mvnormal(rng, Vector::Zero(d), Matrix::Identity(d, d));
      acc += x * x.transpose();
    }
    acc /= kDraws;
    CHECK((acc - Matrix::Identity(d, d)).norm() < 0.05 * std::sqrt(3.0));
  }
  SUBCASE("tiny covariance concentrates on the mean") {
    const Vector mean = Vector::Constant(4, 3.0);
    const Vector x = sample_mvnormal(rng, mean, 1e-12 * Matrix::Identity(4, 4));
    CHECK((x - mean).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("univariate prior with variance 10") {
    const auto xs = testing::draws(kDraws, [&] { return sample_mvnormal(rng, Vector::Zero(1), Matrix::Constant(1, 1, 10.0))(0); });
    CHECK(std::fabs(testing::moments(xs).var - 10.0) < 3 * testing::variance_se(xs));
  }
  SUBCASE("non-SPD covariance reports the pivot") {
    Matrix cov = Matrix::Identity(3, 3);
    cov(2, 2) = -1.0;
    try {
      sample_mvnormal(rng, Vector::Zero(3), cov);
      FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
      CHECK(e.pivot() == 2);
    }
  }
}

TEST_CASE("Wishart parametrization bridge") {
  Matrix rate(2, 2);
  rate << 2.0, 0.5, 0.5, 1.0;
  const StandardWishart s = to_standard({3.0, rate});
  CHECK(s.dof == 6.0);
  CHECK((s.scale - (2.0 * rate).inverse()).norm() < 1e-12);
  const Matrix l = wishart_scale_factor(rate);
  CHECK((l * l.transpose() - s.scale).norm() < 1e-12);
}

TEST_CASE("Wishart and inverse-Wishart moments") {
  RngStream rng(17, 0);
  SUBCASE("d = 1 reduces to Gamma(3, rate 2)") {
    const WishartParams p{3.0, Matrix::Constant(1, 1, 2.0)};
    const auto xs = testing::draws(kDraws, [&] { return sample_wishart(rng, p)(0, 0); });
    CHECK(within_se(xs, 1.5));
    const auto inv = testing::draws(kDraws, [&] { return sample_inv_wishart(rng, p)(0, 0); });
    CHECK(within_se(inv, 1.0));
    CHECK(inv_wishart_mean(p)(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("d = 3, shape 4, identity rate has mean 4 I") {
    const WishartParams p{4.0, Matrix::Identity(3, 3)};
    Matrix acc = Matrix::Zero(3, 3);
    for (int k = 0; k < kDraws; ++k) acc += sample_wishart(rng, p);
    acc /= kDraws;
    CHECK((acc - 4.0 * Matrix::Identity(3, 3)).norm() < 0.05 * (4.0 * Matrix::Identity(3, 3)).norm());
    CHECK((wishart_mean(p) - 4.0 * Matrix::Identity(3, 3)).norm() < 1e-12);
  }
  SUBCASE("E|Ω⁻¹| = Γ_d(c-1)/Γ_d(c)") {
    const WishartParams p{3.0, Matrix::Identity(2, 2)};
    const double expected = std::exp(lngamma_d(2, 2.0) - lngamma_d(2, 3.0));
    CHECK(expected == doctest::Approx(1.0 / 3.0));
    const auto xs = testing::draws(kDraws, [&] { return 1.0 / sample_wishart(rng, p).determinant(); });
    CHECK(within_se(xs, expected));
  }
  SUBCASE("inverse-Wishart mean in d = 3") {
    Matrix rate(3, 3);
    rate << 3.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0;
    const WishartParams p{5.0, rate};
    Matrix acc = Matrix::Zero(3, 3);
    for (int k = 0; k < kDraws; ++k) acc += sample_inv_wishart(rng, p);
    acc /= kDraws;
    CHECK((acc - inv_wishart_mean(p)).norm() < 0.05 * inv_wishart_mean(p).norm());
  }
  CHECK_THROWS_AS(sample_wishart(rng, {0.9, Matrix::Identity(3, 3)}), DomainError);
}

TEST_CASE("d = 1 Wishart matches Gamma in distribution") {
  RngStream a(18, 0), b(18, 1);
  const WishartParams p{3.0, Matrix::Constant(1, 1, 2.0)};
  const auto w = testing::draws(10000, [&] { return sample_wishart(a, p)(0, 0); });
  const auto g = testing::draws(10000, [&] { return sample_gamma(b, 3.0, 2.0); });
  const double critical = 1.628 * std::sqrt(2.0 / 10000.0);
  CHECK(testing::ks_statistic(w, g) < critical);

  const auto iw = testing::draws(10000, [&] { return sample_inv_wishart(a, p)(0, 0); });
  const auto ig = testing::draws(10000, [&] { return 1.0 / sample_gamma(b, 3.0, 2.0); });
  CHECK(testing::ks_statistic(iw, ig) < critical);
}

TEST_CASE("Wishart log density") {
  // d = 1: Gamma(c, rate C) log density.
  const WishartParams p{3.0, Matrix::Constant(1, 1, 2.0)};
  const double x = 0.7;
  const double gamma_logpdf = 3.0 * std::log(2.0) - std::lgamma(3.0) + 2.0 * std::log(x) - 2.0 * x;
  CHECK(logpdf_wishart(Matrix::Constant(1, 1, x), p) == doctest::Approx(gamma_logpdf).epsilon(1e-12));
}

TEST_CASE("multivariate gamma function") {
  for (double c : {0.3, 1.0, 2.5, 17.25}) CHECK(lngamma_d(1, c) == doctest::Approx(std::lgamma(c)).epsilon(1e-14));
  CHECK(lngamma_d(2, 3.0) - lngamma_d(2, 2.0) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
  CHECK(std::exp((std::log(0.5) + lngamma_d(4, 4.0) - lngamma_d(4, 3.0)) / 4.0) == doctest::Approx(1.831).epsilon(5e-4));

  for (int d : {1, 2, 5, 50, 200}) {
    const double c = (d + 1) / 2.0 + 1.3;
    double log_ratio = 0.0;
    for (int j = 1; j <= d; ++j) log_ratio += std::log((2.0 * c - 1.0 - j) / 2.0);
    CAPTURE(d);
    CHECK(std::fabs(lngamma_d(d, c) - lngamma_d(d, c - 1.0) - log_ratio) < 1e-10 * std::max(1.0, std::fabs(log_ratio)));
  }
  CHECK(std::isfinite(lngamma_d(500, 400.0)));
  CHECK_THROWS_AS(lngamma_d(3, 1.0), DomainError);
}

TEST_CASE("multivariate normal log density") {
  CHECK(logpdf_mvnormal(Vector::Zero(1), Vector::Zero(1), Matrix::Identity(1, 1)) ==
        doctest::Approx(-0.9189385).epsilon(1e-7));
  CHECK(logpdf_mvnormal(Vector::Ones(2), Vector::Ones(2), Matrix::Identity(2, 2)) ==
        doctest::Approx(-std::log(2.0 * std::numbers::pi)).epsilon(1e-12));
  Vector y(2);
  y << 1.0, 0.0;
  CHECK(logpdf_mvnormal(y, Vector::Zero(2), 2.0 * Matrix::Identity(2, 2)) == doctest::Approx(-std::log(2.0 * std::numbers::pi) - 0.5 * std::log(4.0) - 0.25).epsilon(1e-12));

  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = 0.0;
  CHECK_THROWS_AS(logpdf_mvnormal(y, Vector::Zero(2), bad), NotPositiveDefinite);
}

TEST_CASE("cached densities agree in both factorizations") {
  Matrix cov(3, 3);
  cov << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5;
  Vector mean(3);
  mean << 1.0, -1.0, 0.5;
  const auto by_cov = GaussianDensity::from_covariance(mean, cov);
  const auto by_prec = GaussianDensity::from_precision_factor(mean, cholesky_lower(cov.inverse()));
  RngStream rng(19, 0);
  Matrix rows(20, 3);
  for (int i = 0; i < 20; ++i) {
    for (int l = 0; l < 3; ++l) rows(i, l) = 2.0 * rng.normal();
  }
  Vector out_cov(20), out_prec(20);
  by_cov.logpdf_rows(rows, out_cov);
  by_prec.logpdf_rows(rows, out_prec);
  for (int i = 0; i < 20; ++i) {
    const double direct = logpdf_mvnormal(rows.row(i).transpose(), mean, cov);
    CHECK(out_cov(i) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(out_prec(i) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("log-sum-exp survives extreme magnitudes") {
  const std::vector<double> v{-1000.0, -1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
  const std::vector<double> w{-230.0, -2.0e5};
  CHECK(log_sum_exp(w) == doctest::Approx(-230.0));
}
