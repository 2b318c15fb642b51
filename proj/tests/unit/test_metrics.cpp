#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/error.hpp"
#include "vra/metrics.hpp"
#include "vra/random.hpp"

using namespace vra;

namespace {

using Vec = std::vector<double>;

Vec random_vector(SplitMix64& r, std::size_t n, bool ties) {
  Vec v(n);
  for (auto& x : v) x = ties ? static_cast<double>(r.below(5)) : r.normal();
  return v;
}

}  // namespace

TEST(Ranks, AverageTies) {
  EXPECT_EQ(average_ranks(Vec{10, 20, 20, 5}), (Vec{2, 3.5, 3.5, 1}));
  EXPECT_EQ(average_ranks(Vec{1, 1, 1}), (Vec{2, 2, 2}));
}

TEST(Srcc, Examples) {
  EXPECT_DOUBLE_EQ(srcc(Vec{1, 2, 3}, Vec{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(srcc(Vec{1, 2, 3}, Vec{3, 2, 1}), -1.0);
  EXPECT_NEAR(srcc(Vec{1, 2, 2, 3}, Vec{1, 2, 3, 4}), oracle::brute_spearman({1, 2, 2, 3}, {1, 2, 3, 4}), 1e-15);
  EXPECT_NEAR(srcc(Vec{1, 2, 2, 3}, Vec{1, 2, 3, 4}), 0.9486832980505138, 1e-15);
}

TEST(Srcc, Errors) {
  EXPECT_THROW(srcc(Vec{1, 2, 3}, Vec{2, 2, 2}), UndefinedMetricError);
  EXPECT_THROW(srcc(Vec{1, 2}, Vec{1, 2}), UndefinedMetricError);
  EXPECT_THROW(srcc(Vec{1, 2, 3}, Vec{1, 2}), ShapeError);
}

TEST(Plcc, Examples) {
  EXPECT_NEAR(plcc(Vec{1, 2, 3, 4}, Vec{3, 5, 7, 9}), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(plcc(Vec{1, 2}, Vec{1, 2}), 1.0);
  EXPECT_THROW(plcc(Vec{1, 1, 1}, Vec{1, 2, 3}), UndefinedMetricError);
  EXPECT_THROW(plcc(Vec{1, 2, 3}, Vec{4, 4, 4}), UndefinedMetricError);
  EXPECT_THROW(plcc(Vec{1, 2, 3}, Vec{1, 2}), ShapeError);
}

TEST(Rmse, Examples) {
  EXPECT_NEAR(rmse(Vec{0, 0}, Vec{3, 4}), std::sqrt(12.5), 1e-15);
  EXPECT_EQ(rmse(Vec{1, 2}, Vec{1, 2}), 0.0);
  EXPECT_THROW(rmse(Vec{1}, Vec{1, 2}), ShapeError);
}

TEST(Metrics, MatchBruteForceOracle) {
  SplitMix64 r(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + r.below(60);
    const Vec p = random_vector(r, n, trial % 3 == 0);
    Vec g = random_vector(r, n, trial % 4 == 0);
    if (std::all_of(g.begin(), g.end(), [&](double v) { return v == g[0]; })) g[0] += 1.0;
    const bool p_const = std::all_of(p.begin(), p.end(), [&](double v) { return v == p[0]; });
    EXPECT_NEAR(rmse(p, g), oracle::brute_rmse(p, g), 1e-12);
    if (p_const) continue;
    EXPECT_NEAR(plcc(p, g), oracle::brute_pearson(p, g), 1e-10);
    EXPECT_NEAR(srcc(p, g), oracle::brute_spearman(p, g), 1e-10);
  }
}

TEST(Metrics, InvarianceProperties) {
  SplitMix64 r(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + r.below(40);
    const Vec p = random_vector(r, n, false);
    const Vec g = random_vector(r, n, false);
    Vec cubed(n), affine(n), shifted_p(n), shifted_g(n);
    const double a = r.uniform(0.1, 10.0);
    const double b = r.uniform(-5.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      cubed[i] = p[i] * p[i] * p[i];
      affine[i] = a * p[i] + b;
      shifted_p[i] = p[i] + b;
      shifted_g[i] = g[i] + b;
    }
    EXPECT_NEAR(srcc(cubed, g), srcc(p, g), 1e-12);
    EXPECT_NEAR(plcc(affine, g), plcc(p, g), 1e-12);
    Vec neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -a * g[i] + b;
    EXPECT_NEAR(plcc(p, neg), -plcc(p, g), 1e-12);
    EXPECT_NEAR(rmse(shifted_p, shifted_g), rmse(p, g), 1e-12);
    const auto logistic = fit_logistic4(p, g);
    if (!logistic.fallback) {
      const Vec mapped = logistic.fit.apply(p);
      // Strictly increasing only where the curve does not saturate in double precision.
      Vec sorted = mapped;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() && logistic.fit.beta1 > logistic.fit.beta2) {
        EXPECT_NEAR(srcc(mapped, g), srcc(p, g), 1e-12);
      }
    }
  }
}

TEST(Logistic, RecoversExactCurve) {
  const LogisticFit truth{5.0, 1.0, 0.0, 1.0};
  SplitMix64 r(3);
  for (int trial = 0; trial < 10; ++trial) {
    Vec p(60);
    for (auto& x : p) x = r.uniform(-4.0, 4.0);
    const Vec g = truth.apply(p);
    const auto res = fit_logistic4(p, g);
    EXPECT_FALSE(res.fallback);
    EXPECT_LT(rmse(res.remapped, g), 1e-6);
  }
}

TEST(Logistic, IdentityTargetsDoNotGetWorse) {
  SplitMix64 r(4);
  for (int trial = 0; trial < 20; ++trial) {
    Vec p(40);
    for (auto& x : p) x = r.uniform(1.0, 5.0);
    const auto res = fit_logistic4(p, p);
    EXPECT_LE(rmse(res.remapped, p), rmse(p, p) + 1e-12);
    Vec g(40);
    for (std::size_t i = 0; i < 40; ++i) g[i] = p[i] + r.normal(0, 0.3);
    EXPECT_LE(rmse(fit_logistic4(p, g).remapped, g), rmse(p, g) + 1e-12);
  }
}

TEST(Logistic, ConstantTargetsGiveFlatCurve) {
  const Vec p = {1, 2, 3, 4, 5, 6};
  const Vec g(6, 3.0);
  const auto res = fit_logistic4(p, g);
  for (double v : res.remapped) EXPECT_NEAR(v, 3.0, 1e-6);
}

TEST(Logistic, FallbacksAreFlagged) {
  const auto short_input = fit_logistic4(Vec{1, 2, 3, 4}, Vec{1, 2, 3, 5});
  EXPECT_TRUE(short_input.fallback);
  EXPECT_EQ(short_input.remapped, (Vec{1, 2, 3, 4}));
  const auto constant_pred = fit_logistic4(Vec{2, 2, 2, 2, 2}, Vec{1, 2, 3, 4, 5});
  EXPECT_TRUE(constant_pred.fallback);
  EXPECT_THROW(fit_logistic4(Vec{1, 2, 3, 4, 5}, Vec{1, 2}), ShapeError);
}

TEST(Logistic, CurveIsMonotone) {
  SplitMix64 r(5);
  for (int trial = 0; trial < 20; ++trial) {
    Vec p(30), g(30);
    for (std::size_t i = 0; i < 30; ++i) {
      p[i] = r.normal();
      g[i] = 3.0 + std::tanh(p[i]) + r.normal(0, 0.2);
    }
    const auto fit = fit_logistic4(p, g).fit;
    EXPECT_GT(std::abs(fit.beta4), 0.0);
    double prev = fit(-10.0);
    for (double x = -10.0; x <= 10.0; x += 0.05) {
      const double v = fit(x);
      if (fit.beta1 >= fit.beta2) {
        EXPECT_GE(v, prev);
      } else {
        EXPECT_LE(v, prev);
      }
      prev = v;
    }
  }
}

TEST(NelderMead, MinimizesRosenbrock) {
  const auto res = nelder_mead(
      [](const std::vector<double>& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); },
      {-1.2, 1.0}, {.max_evaluations = 20000, .f_tolerance = 1e-20, .x_tolerance = 1e-12, .initial_step = 0.1});
  EXPECT_NEAR(res.x[0], 1.0, 1e-5);
  EXPECT_NEAR(res.x[1], 1.0, 1e-5);
}
