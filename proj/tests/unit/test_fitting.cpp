#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "neurotopo/fitting.hpp"
#include "neurotopo/rng.hpp"

using namespace neurotopo;

namespace {

std::vector<DecayPoint> decay(double a, double b, double c, int k_lo, int k_hi) {
  std::vector<DecayPoint> pts;
  for (int k = k_lo; k <= k_hi; ++k) pts.push_back({double(k), b * std::exp(-a * k) + c, 1.0});
  return pts;
}

}  // namespace

TEST(FitExpPlateau, RecoversAxonParametersExactly) {
  const auto pts = decay(0.206, 0.855, 0.409, 2, 25);
  const auto fit = fit_exp_plateau(pts);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.value("a"), 0.206, 1e-6);
  EXPECT_NEAR(fit.value("b"), 0.855, 1e-6);
  EXPECT_NEAR(fit.value("c"), 0.409, 1e-6);
  EXPECT_LT(fit.rss, 1e-20);
  EXPECT_EQ(fit.n_points, pts.size());
}

TEST(FitExpZero, RecoversUnitDecay) {
  const auto fit = fit_exp_zero(decay(1.0, 1.0, 0.0, 2, 10));
  EXPECT_NEAR(fit.value("a"), 1.0, 1e-6);
  EXPECT_NEAR(fit.value("b"), 1.0, 1e-6);
  EXPECT_EQ(fit.params.size(), 2u);
}

TEST(FitExp, NestedRssAndFTest) {
  const auto pts = decay(0.79, 1.933, 0.313, 2, 12);
  const auto full = fit_exp_plateau(pts);
  const auto zero = fit_exp_zero(pts);
  EXPECT_GT(zero.rss, full.rss);
  const auto t = f_test_nested(zero, full);
  EXPECT_LT(t.p_value, 1e-3);
}

TEST(FitExp, NoisyDataGivesStandardErrors) {
  auto pts = decay(0.5, 1.0, 0.3, 2, 20);
  Xoshiro256 rng(4);
  for (auto& p : pts) p.value += 0.01 * rng.normal();
  const auto fit = fit_exp_plateau(pts);
  for (const auto& p : fit.params) {
    EXPECT_GT(p.se, 0.0) << p.name;
    EXPECT_TRUE(std::isfinite(p.se)) << p.name;
  }
  EXPECT_NEAR(fit.value("c"), 0.3, 5 * fit.param("c").se + 1e-3);
}

TEST(FitExp, NeedsFourOrders) {
  EXPECT_THROW(fit_exp_plateau(decay(0.5, 1.0, 0.3, 2, 4)), FitError);
  EXPECT_THROW(fit_exp_zero(std::vector<DecayPoint>{}), FitError);
}

TEST(PowerLaw, ExactExponent) {
  std::vector<XY> d;
  for (double n : {2.0, 5.0, 10.0, 40.0, 100.0}) d.push_back({n, std::sqrt(n)});
  const auto fit = fit_power_law(d);
  EXPECT_NEAR(fit.value("exponent"), 0.5, 1e-12);
  EXPECT_NEAR(fit.param("exponent").se, 0.0, 1e-7);
  EXPECT_NEAR(fit.value("log_prefactor"), 0.0, 1e-12);
  d.push_back({3.0, 0.0});
  EXPECT_THROW(fit_power_law(d), DomainError);
}

TEST(PowerLaw, SlopeEquality) {
  std::vector<XY> a, b;
  Xoshiro256 rng(8);
  for (int n = 1; n <= 30; ++n) {
    a.push_back({double(n), 2.0 * std::pow(n, 0.3) * std::exp(1e-3 * rng.normal())});
    b.push_back({double(n), 1.5 * std::pow(n, 0.8) * std::exp(1e-3 * rng.normal())});
  }
  EXPECT_LT(f_test_slope_equality(a, b).p_value, 1e-3);
  const auto self = f_test_slope_equality(a, a);
  EXPECT_NEAR(self.p_value, 1.0, 1e-9);
  const auto fa = fit_power_law(a), fb = fit_power_law(b);
  EXPECT_LT(f_test_slope_equality(fa, fb, a, b).p_value, 1e-3);
  EXPECT_THROW(f_test_slope_equality(fa, fb, b, std::span<const XY>(a).first(10)), DomainError);
}

TEST(PowerLaw, EqualSlopesDifferentIntercepts) {
  std::vector<XY> a, b;
  Xoshiro256 rng(2);
  for (int n = 1; n <= 40; ++n) {
    a.push_back({double(n), 3.0 * std::pow(n, 0.5) * std::exp(0.05 * rng.normal())});
    b.push_back({double(n), 1.0 * std::pow(n, 0.5) * std::exp(0.05 * rng.normal())});
  }
  EXPECT_GT(f_test_slope_equality(a, b).p_value, 0.001);
}

TEST(TotalLength, ExactSlope) {
  std::vector<SizeLength> d;
  for (double n : {1.0, 3.0, 7.0, 20.0}) d.push_back({n, 10.0 * (2 * n + 1)});
  const auto fit = fit_total_length(d);
  EXPECT_NEAR(fit.value("m"), 10.0, 1e-12);
  EXPECT_THROW(fit_total_length(std::vector<SizeLength>{}), FitError);
}

TEST(FitExp, ConvergesWhenTheDecayHidesInNoise) {
  // weak decay under noise: the optimum sits on the a -> infinity ridge
  Xoshiro256 rng(9009);
  for (int rep = 0; rep < 40; ++rep) {
    auto pts = decay(1.0, 1.0, 0.45, 2, 30);
    for (auto& p : pts) p.value += 0.02 * rng.normal();
    const auto fit = fit_exp_plateau(pts);
    EXPECT_LE(fit.value("a"), detail::kMaxDecayRate);
    EXPECT_LE(fit.rss, fit_exp_zero(pts).rss + 1e-15);
  }
}
