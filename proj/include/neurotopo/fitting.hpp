#pragma once

// Least-squares fits: exponential decay of branching frequency (with and
// without plateau), log-log power laws, and the total-length slope.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "neurotopo/errors.hpp"
#include "neurotopo/stats.hpp"

namespace neurotopo {

enum class ModelForm { exp_plateau, exp_zero, power_law, linear_through_form };

inline std::string to_string(ModelForm f) {
  switch (f) {
    case ModelForm::exp_plateau: return "exp_plateau";
    case ModelForm::exp_zero: return "exp_zero";
    case ModelForm::power_law: return "power_law";
    case ModelForm::linear_through_form: return "linear_through_form";
  }
  return "unknown";
}

struct FitParam {
  std::string name;
  double value = 0.0;
  double se = 0.0;
};

struct FitResult {
  ModelForm form = ModelForm::exp_plateau;
  std::vector<FitParam> params;
  double rss = 0.0;
  std::size_t n_points = 0;
  std::size_t iterations = 0;
  bool converged = true;

  const FitParam& param(std::string_view name) const {
    for (const auto& p : params)
      if (p.name == name) return p;
    throw Error("fit has no parameter '" + std::string(name) + "'");
  }
  double value(std::string_view name) const { return param(name).value; }
};

inline TestResult f_test_nested(const FitResult& restricted, const FitResult& full) {
  if (restricted.n_points != full.n_points) throw DomainError("nested F-test needs fits over the same points");
  return f_test_nested(restricted.rss, restricted.params.size(), full.rss, full.params.size(), full.n_points);
}

struct DecayPoint {
  double order = 0.0;
  double value = 0.0;
  double weight = 1.0;
};

namespace detail {

// u exp(-a (k - k0)) + c, with c pinned at zero when `free_c` is false.
// Fitting the amplitude u at the first order k0 instead of b = u exp(a k0)
// keeps the problem well conditioned when a grows large.
struct DecayModel {
  bool free_c;
  double k0 = 0.0;
  std::size_t dim() const { return free_c ? 3 : 2; }
  double eval(const Eigen::Vector3d& th, double k) const {
    return th[1] * std::exp(-th[0] * (k - k0)) + (free_c ? th[2] : 0.0);
  }
  void gradient(const Eigen::Vector3d& th, double k, Eigen::Vector3d& g) const {
    const double e = std::exp(-th[0] * (k - k0));
    g << -(k - k0) * th[1] * e, e, free_c ? 1.0 : 0.0;
  }
};

struct LmOutcome {
  Eigen::Vector3d theta;
  double rss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline double decay_rss(const DecayModel& model, const Eigen::Vector3d& th, std::span<const DecayPoint> pts) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double r = p.value - model.eval(th, p.order);
    s += p.weight * r * r;
  }
  return s;
}

// Decay rates above this are indistinguishable from a step at the first
// order; bounding a keeps the problem from drifting along the a, b -> inf ridge.
inline constexpr double kMaxDecayRate = 20.0;

// Projected Levenberg-Marquardt on the box 0 <= a <= kMaxDecayRate, b, c >= 0.
// Parameters held at a bound by the gradient are frozen for the step.
inline LmOutcome levenberg_marquardt(const DecayModel& model, Eigen::Vector3d theta, std::span<const DecayPoint> pts,
                                     std::size_t max_iter = 2000, double rel_tol = 1e-10) {
  const auto dim = static_cast<Eigen::Index>(model.dim());
  auto project = [&](Eigen::Vector3d& th) {
    for (Eigen::Index i = 0; i < 3; ++i) th[i] = std::max(th[i], 0.0);
    th[0] = std::min(th[0], kMaxDecayRate);
    if (!model.free_c) th[2] = 0.0;
  };
  project(theta);
  double scale = 0.0;
  for (const auto& p : pts) scale += p.weight * p.value * p.value;
  LmOutcome out{theta, decay_rss(model, theta, pts), 0, false};
  double lambda = 1e-3;
  Eigen::Vector3d g;
  for (; out.iterations < max_iter; ++out.iterations) {
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd jtr = Eigen::VectorXd::Zero(dim);
    for (const auto& p : pts) {
      model.gradient(out.theta, p.order, g);
      const double r = p.value - model.eval(out.theta, p.order);
      for (Eigen::Index i = 0; i < dim; ++i) {
        jtr[i] += p.weight * g[i] * r;
        for (Eigen::Index j = 0; j < dim; ++j) jtj(i, j) += p.weight * g[i] * g[j];
      }
    }
    // jtr is the descent direction; a bound is active when it points outward
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const bool at_lower = out.theta[i] <= 0.0 && jtr[i] <= 0.0;
      const bool at_upper = i == 0 && out.theta[i] >= kMaxDecayRate && jtr[i] >= 0.0;
      if (!at_lower && !at_upper) free.push_back(i);
    }
    if (free.empty()) {
      out.converged = true;
      return out;
    }
    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd jf(nf, nf);
    Eigen::VectorXd rf(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      rf[i] = jtr[free[static_cast<std::size_t>(i)]];
      for (Eigen::Index j = 0; j < nf; ++j) jf(i, j) = jtj(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
    }
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = jf;
      for (Eigen::Index i = 0; i < nf; ++i) damped(i, i) += lambda * std::max(jf(i, i), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(rf);
      Eigen::Vector3d trial = out.theta;
      for (Eigen::Index i = 0; i < nf; ++i) trial[free[static_cast<std::size_t>(i)]] += step[i];
      project(trial);
      const double trial_rss = decay_rss(model, trial, pts);
      if (std::isfinite(trial_rss) && trial_rss <= out.rss) {
        const double drop = out.rss - trial_rss;
        const double move = (trial - out.theta).norm() / std::max(out.theta.norm(), 1e-12);
        out.theta = trial;
        out.rss = trial_rss;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if ((drop <= rel_tol * std::max(out.rss, 1e-300) && move < 1e-8) || drop <= 1e-15 * out.rss ||
            out.rss <= 1e-30 * scale) {
          out.converged = true;
          ++out.iterations;
          return out;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no descent direction left at any damping: a stationary point of the box problem
      out.converged = true;
      return out;
    }
  }
  return out;
}

inline FitResult fit_decay(std::span<const DecayPoint> pts, bool free_c) {
  if (pts.size() < 4) throw FitError("exponential fit needs at least 4 orders, got " + std::to_string(pts.size()));
  const double k0 = std::ranges::min(pts, {}, &DecayPoint::order).order;
  const DecayModel model{free_c, k0};
  const std::size_t p = model.dim();

  const double first = pts.front().value;
  const double last = pts.back().value;
  std::vector<Eigen::Vector3d> starts;
  for (double a : {0.1, 0.5, 1.0}) {
    if (free_c) {
      starts.emplace_back(a, std::max(first - last, 1e-3), std::max(last, 0.0));
    } else {
      starts.emplace_back(a, std::max(first, 1e-3), 0.0);
    }
  }

  LmOutcome best;
  best.rss = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  std::size_t total_iter = 0;
  for (const auto& s : starts) {
    const auto run = levenberg_marquardt(model, s, pts);
    total_iter += run.iterations;
    any_converged = any_converged || run.converged;
    if (run.rss < best.rss) best = run;
  }
  if (!any_converged) {
    throw FitError(std::string(free_c ? "exp_plateau" : "exp_zero") + " fit did not converge from any start (best rss " +
                   std::to_string(best.rss) + " after " + std::to_string(total_iter) + " iterations)");
  }

  FitResult fit;
  fit.form = free_c ? ModelForm::exp_plateau : ModelForm::exp_zero;
  fit.rss = best.rss;
  fit.n_points = pts.size();
  fit.iterations = total_iter;
  fit.converged = best.converged;

  // standard errors in the reported (a, b, c) parametrization
  Eigen::Vector3d theta = best.theta;
  theta[1] = best.theta[1] * std::exp(best.theta[0] * k0);
  const DecayModel reported{free_c, 0.0};
  const auto dim = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Vector3d g;
  for (const auto& pt : pts) {
    reported.gradient(theta, pt.order, g);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) jtj(i, j) += pt.weight * g[i] * g[j];
  }
  const double sigma2 = pts.size() > p ? best.rss / static_cast<double>(pts.size() - p) : 0.0;
  Eigen::VectorXd se = Eigen::VectorXd::Constant(dim, std::numeric_limits<double>::quiet_NaN());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd cov = lu.inverse() * sigma2;
    for (Eigen::Index i = 0; i < dim; ++i) se[i] = std::sqrt(std::max(cov(i, i), 0.0));
  }
  const std::array<const char*, 3> names{"a", "b", "c"};
  for (Eigen::Index i = 0; i < dim; ++i) fit.params.push_back({names[static_cast<std::size_t>(i)], theta[i], se[i]});
  return fit;
}

}  // namespace detail

/// p_k = b exp(-a k) + c over the given orders, a, b, c >= 0.
inline FitResult fit_exp_plateau(std::span<const DecayPoint> points) { return detail::fit_decay(points, true); }

/// p_k = b exp(-a k), the plateau pinned at zero.
inline FitResult fit_exp_zero(std::span<const DecayPoint> points) { return detail::fit_decay(points, false); }

struct XY {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

struct LogLogSums {
  std::size_t n = 0;
  double mean_x = 0.0, mean_y = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
};

inline LogLogSums log_log_sums(std::span<const XY> data) {
  LogLogSums s;
  s.n = data.size();
  for (const auto& d : data) {
    if (!(d.x > 0.0) || !(d.y > 0.0)) throw DomainError("power-law fit needs positive values");
    s.mean_x += std::log(d.x);
    s.mean_y += std::log(d.y);
  }
  s.mean_x /= static_cast<double>(s.n);
  s.mean_y /= static_cast<double>(s.n);
  for (const auto& d : data) {
    const double dx = std::log(d.x) - s.mean_x, dy = std::log(d.y) - s.mean_y;
    s.sxx += dx * dx;
    s.sxy += dx * dy;
    s.syy += dy * dy;
  }
  return s;
}

}  // namespace detail

/// OLS of log(y) on log(x). Parameters: exponent, log_prefactor.
inline FitResult fit_power_law(std::span<const XY> data) {
  if (data.size() < 3) throw FitError("power-law fit needs at least 3 points");
  const auto s = detail::log_log_sums(data);
  if (s.sxx <= 0.0) throw FitError("power-law fit needs at least two distinct x values");
  const double slope = s.sxy / s.sxx;
  const double intercept = s.mean_y - slope * s.mean_x;
  FitResult fit;
  fit.form = ModelForm::power_law;
  fit.n_points = data.size();
  fit.rss = std::max(0.0, s.syy - slope * s.sxy);
  const double sigma2 = fit.rss / static_cast<double>(data.size() - 2);
  const double n = static_cast<double>(data.size());
  fit.params.push_back({"exponent", slope, std::sqrt(sigma2 / s.sxx)});
  fit.params.push_back({"log_prefactor", intercept, std::sqrt(sigma2 * (1.0 / n + s.mean_x * s.mean_x / s.sxx))});
  return fit;
}

/// Slope equality of two log-log regressions: separate slopes with group
/// intercepts (4 parameters) against a common slope with group intercepts
/// (3 parameters) over the combined points.
inline TestResult f_test_slope_equality(std::span<const XY> data1, std::span<const XY> data2) {
  if (data1.size() < 3 || data2.size() < 3) throw FitError("slope comparison needs at least 3 points per group");
  const auto s1 = detail::log_log_sums(data1);
  const auto s2 = detail::log_log_sums(data2);
  if (s1.sxx <= 0.0 || s2.sxx <= 0.0) throw FitError("slope comparison needs distinct x values in each group");
  const double rss_full = std::max(0.0, s1.syy - s1.sxy * s1.sxy / s1.sxx) + std::max(0.0, s2.syy - s2.sxy * s2.sxy / s2.sxx);
  const double common = (s1.sxy + s2.sxy) / (s1.sxx + s2.sxx);
  const double rss_restricted = std::max(0.0, s1.syy + s2.syy - common * (s1.sxy + s2.sxy));
  return f_test_nested(rss_restricted, 3, rss_full, 4, data1.size() + data2.size());
}

inline TestResult f_test_slope_equality(const FitResult& fit1, const FitResult& fit2, std::span<const XY> data1,
                                        std::span<const XY> data2) {
  if (fit1.form != ModelForm::power_law || fit2.form != ModelForm::power_law)
    throw DomainError("slope comparison needs two power-law fits");
  if (fit1.n_points != data1.size() || fit2.n_points != data2.size())
    throw DomainError("fits do not match the supplied data");
  return f_test_slope_equality(data1, data2);
}

struct SizeLength {
  double n = 0.0;       // branching nodes
  double length = 0.0;  // total length, um
};

/// One-parameter least squares L = m (2N + 1).
inline FitResult fit_total_length(std::span<const SizeLength> data) {
  if (data.empty()) throw FitError("total-length fit needs at least one tree");
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& d : data) {
    const double x = 2.0 * d.n + 1.0;
    sxx += x * x;
    sxy += x * d.length;
    syy += d.length * d.length;
  }
  const double m = sxy / sxx;
  FitResult fit;
  fit.form = ModelForm::linear_through_form;
  fit.n_points = data.size();
  fit.rss = std::max(0.0, syy - m * sxy);
  const double se = data.size() > 1 ? std::sqrt(fit.rss / static_cast<double>(data.size() - 1) / sxx) : 0.0;
  fit.params.push_back({"m", m, se});
  return fit;
}

}  // namespace neurotopo
