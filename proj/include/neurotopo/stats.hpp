#pragma once

// Descriptive statistics and the hypothesis tests used to compare tree
// populations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "neurotopo/errors.hpp"

namespace neurotopo {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  // shifted by the first value so a constant sample has exactly its value as mean
  const double x0 = x.front();
  double s = 0.0;
  for (double v : x) s += v - x0;
  return x0 + s / static_cast<double>(x.size());
}

/// Sample variance (n - 1 denominator).
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("variance needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

inline double median(std::span<const double> x) {
  if (x.empty()) throw DomainError("median of an empty sample");
  std::vector<double> v(x.begin(), x.end());
  std::ranges::sort(v);
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct SampleSummary {
  double mean = 0.0;
  std::optional<double> sem;  // absent for n < 2
  double median = 0.0;
  std::size_t n = 0;
};

inline SampleSummary summarize_sample(std::span<const double> x) {
  SampleSummary s;
  s.n = x.size();
  if (x.empty()) return s;
  s.mean = mean(x);
  s.median = median(x);
  if (x.size() >= 2) s.sem = std::sqrt(variance(x) / static_cast<double>(x.size()));
  return s;
}

enum class TestKind { ks_two_sample, pearson, t_one_sample, t_welch, t_pooled, f_nested, shuffle };

inline std::string to_string(TestKind k) {
  switch (k) {
    case TestKind::ks_two_sample: return "ks_two_sample";
    case TestKind::pearson: return "pearson";
    case TestKind::t_one_sample: return "t_one_sample";
    case TestKind::t_welch: return "t_welch";
    case TestKind::t_pooled: return "t_pooled";
    case TestKind::f_nested: return "f_nested";
    case TestKind::shuffle: return "shuffle";
  }
  return "unknown";
}

struct TestResult {
  TestKind kind;
  double statistic = 0.0;
  double p_value = 1.0;
  double df1 = 0.0;  // degrees of freedom where applicable
  double df2 = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double estimate = 0.0;  // r for pearson, mean or mean difference for t-tests
  bool degenerate = false;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // theta-function form; converges fast for small lambda
    const double c = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 100; ++j) {
      const double term = std::exp(c * (2 * j - 1) * (2 * j - 1));
      cdf += term;
      if (term < 1e-18 * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample KS with the asymptotic p-value at effective size nx*ny/(nx+ny).
inline TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample needs two non-empty samples");
  std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
  std::ranges::sort(a);
  std::ranges::sort(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestResult r{TestKind::ks_two_sample};
  r.statistic = d;
  r.n1 = a.size();
  r.n2 = b.size();
  r.p_value = kolmogorov_sf(std::sqrt(na * nb / (na + nb)) * d);
  return r;
}

inline double student_t_two_sided(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

inline double fisher_f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  boost::math::fisher_f dist(df1, df2);
  return std::clamp(boost::math::cdf(boost::math::complement(dist, f)), 0.0, 1.0);
}

/// Pearson correlation with the two-sided t-based p-value on n-2 df.
inline TestResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("pearson needs samples of equal length");
  if (x.size() < 3) throw DomainError("pearson needs at least 3 pairs");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("correlation undefined for a constant sample");
  TestResult r{TestKind::pearson};
  const double rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(x.size()) - 2.0;
  r.estimate = rho;
  r.n1 = x.size();
  r.df1 = df;
  if (std::abs(rho) >= 1.0) {
    r.statistic = std::copysign(std::numeric_limits<double>::infinity(), rho);
    r.p_value = 0.0;
  } else {
    r.statistic = rho * std::sqrt(df / (1.0 - rho * rho));
    r.p_value = student_t_two_sided(r.statistic, df);
  }
  return r;
}

/// One-sample two-sided t-test against mean 0.
inline TestResult t_test_zero_mean(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("t-test needs at least 2 values");
  TestResult r{TestKind::t_one_sample};
  r.n1 = x.size();
  r.df1 = static_cast<double>(x.size()) - 1.0;
  r.estimate = mean(x);
  const double var = variance(x);
  if (var == 0.0) {
    r.degenerate = true;
    r.statistic = r.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.estimate);
    r.p_value = r.estimate == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = r.estimate / std::sqrt(var / static_cast<double>(x.size()));
  r.p_value = student_t_two_sided(r.statistic, r.df1);
  return r;
}

/// Two-sample two-sided t-test; Welch-Satterthwaite unless `pooled`.
inline TestResult t_test_two_sample(std::span<const double> x, std::span<const double> y, bool pooled = false) {
  if (x.size() < 2 || y.size() < 2) throw DomainError("two-sample t-test needs at least 2 values per sample");
  TestResult r{pooled ? TestKind::t_pooled : TestKind::t_welch};
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  const double vx = variance(x), vy = variance(y);
  r.n1 = x.size();
  r.n2 = y.size();
  r.estimate = mean(x) - mean(y);
  double se2;
  if (pooled) {
    r.df1 = nx + ny - 2.0;
    const double sp = ((nx - 1.0) * vx + (ny - 1.0) * vy) / r.df1;
    se2 = sp * (1.0 / nx + 1.0 / ny);
  } else {
    se2 = vx / nx + vy / ny;
    const double num = se2 * se2;
    const double den = (vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0);
    r.df1 = den > 0.0 ? num / den : nx + ny - 2.0;
  }
  if (se2 == 0.0) {
    r.degenerate = true;
    r.statistic = r.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.estimate);
    r.p_value = r.estimate == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.statistic = r.estimate / std::sqrt(se2);
  r.p_value = student_t_two_sided(r.statistic, r.df1);
  return r;
}

/// Nested-model F-test from residual sums of squares. `degenerate` marks a
/// perfect full-model fit (rss_full == 0).
inline TestResult f_test_nested(double rss_restricted, std::size_t params_restricted, double rss_full,
                                std::size_t params_full, std::size_t n_points) {
  if (params_restricted >= params_full) throw DomainError("restricted model must have fewer parameters");
  if (n_points <= params_full) throw DomainError("F-test needs more points than full-model parameters");
  TestResult r{TestKind::f_nested};
  r.df1 = static_cast<double>(params_full - params_restricted);
  r.df2 = static_cast<double>(n_points - params_full);
  r.n1 = n_points;
  const double gain = std::max(0.0, rss_restricted - rss_full);
  if (rss_full <= 0.0) {
    r.degenerate = true;
    r.statistic = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    r.p_value = gain > 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.statistic = (gain / r.df1) / (rss_full / r.df2);
  r.p_value = fisher_f_sf(r.statistic, r.df1, r.df2);
  return r;
}

struct Histogram {
  double low = 0.0;
  double width = 0.0;
  std::vector<std::size_t> counts;
};

inline Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  Histogram h;
  h.counts.assign(bins, 0);
  if (values.empty() || bins == 0) return h;
  const auto [lo, hi] = std::ranges::minmax(values);
  h.low = lo;
  h.width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / h.width);
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

}  // namespace neurotopo
