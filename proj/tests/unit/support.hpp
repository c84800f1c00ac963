#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace testing {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se = 0.0;  // standard error of the mean
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) m.mean += x;
  m.mean /= n;
  for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
  m.var /= n - 1.0;
  m.se = std::sqrt(m.var / n);
  return m;
}

// Standard error of the sample variance, from the fourth central moment.
inline double variance_se(const std::vector<double>& xs) {
  const Moments m = moments(xs);
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - m.mean, 4);
  m4 /= static_cast<double>(xs.size());
  return std::sqrt((m4 - m.var * m.var) / static_cast<double>(xs.size()));
}

// Standard error of the mean of a correlated series from `batches` batch means.
inline double batch_se(const std::vector<double>& xs, int batches) {
  const std::size_t len = xs.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < len; ++k) acc += xs[b * len + k];
    means.push_back(acc / static_cast<double>(len));
  }
  return moments(means).se;
}

inline std::vector<double> draws(int n, const std::function<double()>& f) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) x = f();
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// ∫_0^∞ f(x) dx by the trapezoid rule in t = log x.
inline double integrate_positive(const std::function<double(double)>& f, double lo = -30.0, double hi = 30.0,
                                 int steps = 60000) {
  const double h = (hi - lo) / steps;
  double acc = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = lo + h * k;
    const double x = std::exp(t);
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    acc += w * f(x) * x;
  }
  return acc * h;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("gmix_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
