#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vra/error.hpp"
#include "vra/metrics.hpp"
#include "vra/random.hpp"
#include "vra/svr.hpp"

using namespace vra;

namespace {

struct Instance {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  SvrParams params;
};

Instance random_instance(std::uint64_t seed, bool linear) {
  SplitMix64 r(seed);
  const auto n = static_cast<Eigen::Index>(5 + r.below(16));
  const auto d = static_cast<Eigen::Index>(1 + r.below(5));
  const double Cs[] = {0.1, 1.0, 10.0, 100.0};
  Instance inst;
  inst.params.C = Cs[r.below(4)];
  inst.params.epsilon = r.below(2) ? 0.1 : 0.0;
  inst.params.kernel = linear ? Kernel::linear() : Kernel::rbf(std::pow(10.0, r.uniform(-2.0, 0.5)));
  inst.params.tolerance = 1e-5;
  inst.X.resize(n, d);
  inst.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) inst.X(i, j) = r.normal();
    inst.y(i) = r.uniform(1.0, 5.0);
  }
  return inst;
}

oracle::SvrSolution solve(const Instance& inst) {
  const bool linear = inst.params.kernel.type == KernelType::kLinear;
  return oracle::solve_svr_dual(inst.X, inst.y, linear ? oracle::KernelKind::kLinear : oracle::KernelKind::kRbf,
                                inst.params.kernel.gamma, inst.params.C, inst.params.epsilon, 200'000);
}

}  // namespace

TEST(Standardizer, Examples) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 4, 2, 4, 3, 4;
  const auto s = Standardizer::fit(X);
  const Eigen::MatrixXd Z = s.apply(X);
  EXPECT_DOUBLE_EQ(Z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(Z(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(Z(2, 0), 1.0);
  EXPECT_EQ(Z.col(1).cwiseAbs().maxCoeff(), 0.0);
  Eigen::MatrixXd unseen(1, 2);
  unseen << 5, 7;
  EXPECT_DOUBLE_EQ(s.apply(unseen)(0, 0), 3.0);
  EXPECT_THROW(s.apply(Eigen::MatrixXd(1, 3)), ShapeError);
  EXPECT_THROW(Standardizer::fit(Eigen::MatrixXd(0, 2)), ValidationError);
}

TEST(Standardizer, ColumnsHaveZeroMeanUnitStd) {
  SplitMix64 r(2);
  Eigen::MatrixXd X(30, 4);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = r.normal(10.0 * j, 1.0 + j);
  const Eigen::MatrixXd Z = Standardizer::fit(X).apply(X);
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    EXPECT_NEAR(Z.col(j).mean(), 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt((Z.col(j).array() - Z.col(j).mean()).square().sum() / (Z.rows() - 1)), 1.0, 1e-9);
  }
}

TEST(Svr, OneDimensionalLinearExample) {
  Eigen::MatrixXd X(3, 1);
  X << -1, 0, 1;
  Eigen::VectorXd y(3);
  y << -1, 0, 1;
  SvrParams p{Kernel::linear(), 100.0, 0.1};
  const SvrModel m = train_svr(X, y, p);
  const Eigen::VectorXd pred = predict(m, X);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_LE(std::abs(pred(i) - y(i)), 0.1 + 1e-3);

  const auto o = oracle::solve_svr_dual(X, y, oracle::KernelKind::kLinear, 0.0, 100.0, 0.1);
  const Eigen::VectorXd w = linear_weights(m);
  ASSERT_EQ(w.size(), 1);
  EXPECT_GT(w(0), 0.0);
  // Oracle weight in standardized space: sum_i beta_i z_i.
  EXPECT_NEAR(w(0), o.beta.dot(o.Z.col(0)), 1e-3);
}

TEST(Svr, ConstantTargetsGiveBiasOnlyModel) {
  Eigen::MatrixXd X(6, 2);
  X << 1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 2, 3;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 3.25);
  for (const auto& k : {Kernel::linear(), Kernel::rbf(0.5)}) {
    const SvrModel m = train_svr(X, y, {k, 10.0, 0.1});
    EXPECT_EQ(m.dual_coeffs.size(), 0);
    const Eigen::VectorXd pred = predict(m, X);
    for (Eigen::Index i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(pred(i), 3.25);
    if (k.type == KernelType::kLinear) {
      EXPECT_EQ(linear_weights(m).cwiseAbs().maxCoeff(), 0.0);
    }
  }
}

TEST(Svr, InvalidInputs) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 1, 2, std::nan("");
  EXPECT_THROW(train_svr(X, y, {}), ValidationError);
  y(2) = 3;
  EXPECT_THROW(train_svr(X, y, {Kernel::rbf(1.0), -1.0, 0.1}), ValidationError);
  EXPECT_THROW(train_svr(X, y, {Kernel::rbf(1.0), 1.0, -0.1}), ValidationError);
  EXPECT_THROW(train_svr(X.topRows(1), y.head(1), {}), ValidationError);
  EXPECT_THROW(train_svr(X, y.head(2), {}), ValidationError);
}

TEST(Svr, IterationLimitRaisesConvergenceError) {
  const Instance inst = random_instance(77, false);
  SvrParams p = inst.params;
  p.C = 100.0;
  p.max_iterations = 1;
  try {
    train_svr(inst.X, inst.y, p);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.final_violation(), p.tolerance);
  }
}

TEST(Svr, PredictShapes) {
  const Instance inst = random_instance(3, false);
  const SvrModel m = train_svr(inst.X, inst.y, inst.params, {});
  EXPECT_EQ(predict(m, Eigen::MatrixXd(0, inst.X.cols())).size(), 0);
  EXPECT_THROW(predict(m, Eigen::MatrixXd::Zero(2, inst.X.cols() + 1)), ShapeError);
  EXPECT_THROW(linear_weights(m), KernelError);
}

TEST(Svr, FeatureNamesAreChecked) {
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 0, 1, 1, 1, 0, 0;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  const SvrModel m = train_svr(X, y, {}, {"a", "b"});
  EXPECT_NO_THROW(predict(m, X, {"a", "b"}));
  EXPECT_THROW(predict(m, X, {"b", "a"}), SchemaError);
}

TEST(Svr, DualFeasibilityAndSupportVectors) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = random_instance(seed, seed % 2 == 0);
    inst.params.tolerance = 1e-3;
    const SvrModel m = train_svr(inst.X, inst.y, inst.params);
    EXPECT_LE(m.kkt_violation, 1e-3);
    EXPECT_NEAR(m.dual_coeffs.sum(), 0.0, 1e-6);
    for (Eigen::Index s = 0; s < m.dual_coeffs.size(); ++s) {
      EXPECT_LE(std::abs(m.dual_coeffs(s)), m.C * (1 + 1e-12));
      EXPECT_NE(m.dual_coeffs(s), 0.0);
    }
    EXPECT_EQ(m.support_indices.size(), static_cast<std::size_t>(m.dual_coeffs.size()));
  }
}

TEST(Svr, MatchesQpOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Instance inst = random_instance(500 + seed, seed % 2 == 1);
    const SvrModel m = train_svr(inst.X, inst.y, inst.params);
    const auto o = solve(inst);
    const Eigen::VectorXd pred = predict(m, inst.X);
    for (Eigen::Index i = 0; i < inst.X.rows(); ++i)
      EXPECT_NEAR(pred(i), o.predict(inst.X.row(i).transpose()), 1e-4) << "seed " << seed;
    EXPECT_NEAR(m.objective, o.objective, 1e-6 * std::max(1.0, std::abs(o.objective))) << "seed " << seed;
  }
}

TEST(Svr, PredictionInvariantToRowOrder) {
  const Instance inst = random_instance(21, false);
  SvrParams p = inst.params;
  p.tolerance = 1e-8;
  const SvrModel a = train_svr(inst.X, inst.y, p);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(inst.X.rows());
  perm.setIdentity();
  SplitMix64 r(3);
  r.shuffle(std::span<int>(perm.indices().data(), static_cast<std::size_t>(perm.indices().size())));
  const SvrModel b = train_svr(perm * inst.X, perm * inst.y, p);
  const Eigen::VectorXd pa = predict(a, inst.X);
  const Eigen::VectorXd pb = predict(b, inst.X);
  EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Svr, DuplicateRowDoesNotWorsenTrainingRmseBeyondEpsilon) {
  // Training-set sized problems; tiny ones are covered by the counterexample below.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SplitMix64 r(1300 + seed);
    const auto n = static_cast<Eigen::Index>(50 + r.below(51));
    const auto d = static_cast<Eigen::Index>(1 + r.below(8));
    const double Cs[] = {0.1, 1.0, 10.0, 100.0};
    SvrParams p;
    p.C = Cs[r.below(4)];
    p.epsilon = 0.1;
    p.kernel = seed % 2 ? Kernel::rbf(std::pow(10.0, r.uniform(-2.0, 0.0))) : Kernel::linear();
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) X(i, j) = r.normal();
      y(i) = std::clamp(3.0 + X(i, 0) + r.normal(0.0, 0.5), 1.0, 5.0);
    }
    const auto dup = static_cast<Eigen::Index>(r.below(static_cast<std::uint64_t>(n)));
    Eigen::MatrixXd X2(n + 1, d);
    X2 << X, X.row(dup);
    Eigen::VectorXd y2(n + 1);
    y2 << y, y(dup);
    const Eigen::VectorXd pa = predict(train_svr(X, y, p), X);
    const Eigen::VectorXd pb = predict(train_svr(X2, y2, p), X);
    const std::span<const double> gt(y.data(), static_cast<std::size_t>(n));
    const double ra = rmse({pa.data(), static_cast<std::size_t>(n)}, gt);
    const double rb = rmse({pb.data(), static_cast<std::size_t>(n)}, gt);
    EXPECT_LE(rb, ra + p.epsilon) << "seed " << seed;
  }
}

TEST(Svr, DuplicateRowCanWorsenRmseOnTinyProblems) {
  // n = 8, d = 5, C = 10: the exact QP optimum itself moves away from the
  // data by more than eps, and SMO agrees with it.
  SplitMix64 r(950);
  const auto n = static_cast<Eigen::Index>(5 + r.below(16));
  const auto d = static_cast<Eigen::Index>(1 + r.below(5));
  const double Cs[] = {0.1, 1.0, 10.0, 100.0};
  const double C = Cs[r.below(4)];
  r.below(2);
  ASSERT_EQ(n, 8);
  ASSERT_EQ(d, 5);
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = r.normal();
    y(i) = r.uniform(1.0, 5.0);
  }
  Eigen::MatrixXd X2(n + 1, d);
  X2 << X, X.row(0);
  Eigen::VectorXd y2(n + 1);
  y2 << y, y(0);
  const SvrParams p{Kernel::linear(), C, 0.1, 1e-6};
  const auto kind = oracle::KernelKind::kLinear;
  const auto oa = oracle::solve_svr_dual(X, y, kind, 0.0, C, 0.1, 200'000);
  const auto ob = oracle::solve_svr_dual(X2, y2, kind, 0.0, C, 0.1, 200'000);
  const Eigen::VectorXd pa = predict(train_svr(X, y, p), X);
  const Eigen::VectorXd pb = predict(train_svr(X2, y2, p), X);
  double ra = 0.0, rb = 0.0, qa = 0.0, qb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    ra += (pa(i) - y(i)) * (pa(i) - y(i));
    rb += (pb(i) - y(i)) * (pb(i) - y(i));
    const double a = oa.predict(X.row(i).transpose());
    const double b = ob.predict(X.row(i).transpose());
    qa += (a - y(i)) * (a - y(i));
    qb += (b - y(i)) * (b - y(i));
  }
  const auto root = [n](double ss) { return std::sqrt(ss / static_cast<double>(n)); };
  EXPECT_GT(root(qb), root(qa) + 0.1);
  EXPECT_NEAR(root(ra), root(qa), 1e-4);
  EXPECT_NEAR(root(rb), root(qb), 1e-4);
}

TEST(Svr, DuplicatedFeatureSplitsTheWeight) {
  SplitMix64 r(8);
  Eigen::MatrixXd X(15, 2);
  Eigen::VectorXd y(15);
  for (Eigen::Index i = 0; i < 15; ++i) {
    X(i, 0) = r.normal();
    X(i, 1) = r.normal();
    y(i) = 2.0 * X(i, 0) - X(i, 1) + 0.1 * r.normal();
  }
  SvrParams p{Kernel::linear(), 10.0, 0.1, 1e-6};
  const Eigen::VectorXd w = linear_weights(train_svr(X, y, p));
  Eigen::MatrixXd X3(15, 3);
  X3 << X, X.col(0);
  const Eigen::VectorXd w3 = linear_weights(train_svr(X3, y, p));
  EXPECT_NEAR(w3(0) + w3(2), w(0), 1e-3);
  EXPECT_NEAR(w3(1), w(1), 1e-3);
  // The oracle agrees on the augmented problem.
  const auto o = oracle::solve_svr_dual(X3, y, oracle::KernelKind::kLinear, 0.0, 10.0, 0.1);
  EXPECT_NEAR(w3(0) + w3(2), o.beta.dot(o.Z.col(0)) + o.beta.dot(o.Z.col(2)), 1e-3);
}

TEST(Svr, RbfFlattensAsGammaVanishes) {
  const Instance inst = random_instance(31, false);
  auto spread = [&](double gamma) {
    SvrParams p = inst.params;
    p.kernel = Kernel::rbf(gamma);
    const Eigen::VectorXd pred = predict(train_svr(inst.X, inst.y, p), inst.X);
    return pred.maxCoeff() - pred.minCoeff();
  };
  const double s6 = spread(1e-6);
  const double s9 = spread(1e-9);
  EXPECT_LT(s9, s6);
  EXPECT_LT(s9, 1e-3);
}

TEST(GridSearch, SinglePointAndDeterminism) {
  const Instance inst = random_instance(40, false);
  SvrGrid one{{10.0}, {0.1}};
  const auto g = grid_search(inst.X, inst.y, inst.params, one, 1);
  EXPECT_EQ(g.best_C, 10.0);
  EXPECT_EQ(g.best_gamma, 0.1);
  SplitMix64 r(4);
  Eigen::MatrixXd X(60, 3);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = r.normal();
    y(i) = X(i, 0) + 0.3 * r.normal();
  }
  const auto a = grid_search(X, y, {}, {}, 7);
  const auto b = grid_search(X, y, {}, {}, 7);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.points.size(), 25u);
  EXPECT_EQ(a.criterion, GridCriterion::kPlcc);
}

TEST(GridSearch, BestPointAttainsTheMaximumWithSmallValueTieBreak) {
  SplitMix64 r(5);
  Eigen::MatrixXd X(80, 2);
  Eigen::VectorXd y(80);
  for (Eigen::Index i = 0; i < 80; ++i) {
    X(i, 0) = r.normal();
    X(i, 1) = r.normal();
    y(i) = 3.0 + X(i, 0) + 0.5 * r.normal();
  }
  const auto g = grid_search(X, y, {}, {}, 3);
  double best = -2.0;
  for (const auto& p : g.points)
    if (p.score) best = std::max(best, *p.score);
  for (const auto& p : g.points) {
    if (!p.score || *p.score != best) continue;
    EXPECT_EQ(p.C, g.best_C);
    EXPECT_EQ(p.gamma, g.best_gamma);
    break;  // points are sorted by (C, gamma): the first maximum is the chosen one
  }
}

TEST(GridSearch, LinearCollapsesGammaAndSelectsNearOracleOptimum) {
  SplitMix64 r(6);
  Eigen::MatrixXd X(100, 3);
  Eigen::VectorXd y(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = r.normal();
    y(i) = 2.0 * X(i, 0) - X(i, 2) + 0.5 * r.normal();
  }
  SvrParams base{Kernel::linear(), 1.0, 0.1};
  const auto g = grid_search(X, y, base, {}, 11);
  EXPECT_EQ(g.points.size(), 5u);

  // Exhaustive re-evaluation on the same validation split: reconstruct it.
  std::vector<std::size_t> perm(100);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 s(11);
  s.shuffle(std::span<std::size_t>(perm));
  std::vector<std::size_t> val(perm.begin(), perm.begin() + 20);
  std::vector<std::size_t> tr(perm.begin() + 20, perm.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  auto rows = [&](const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      A.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(idx[k]));
      b(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(idx[k]));
    }
    return std::pair{A, b};
  };
  const auto [Xt, yt] = rows(tr);
  const auto [Xv, yv] = rows(val);
  std::vector<std::pair<double, double>> scored;
  for (double C : SvrGrid{}.C) {
    const auto o = oracle::solve_svr_dual(Xt, yt, oracle::KernelKind::kLinear, 0.0, C, 0.1, 200'000);
    std::vector<double> pv;
    for (Eigen::Index i = 0; i < Xv.rows(); ++i) pv.push_back(o.predict(Xv.row(i).transpose()));
    scored.push_back({oracle::brute_pearson(pv, std::vector<double>(yv.data(), yv.data() + yv.size())), C});
  }
  std::sort(scored.rbegin(), scored.rend());
  EXPECT_TRUE(g.best_C == scored[0].second || g.best_C == scored[1].second);
}

TEST(GridSearch, ConstantValidationTargetsFallBackToRmse) {
  Eigen::MatrixXd X(10, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 2.0);
  for (Eigen::Index i = 0; i < 10; ++i) X(i, 0) = static_cast<double>(i);
  const auto g = grid_search(X, y, {}, {}, 0);
  EXPECT_TRUE(g.fallback);
  EXPECT_EQ(g.criterion, GridCriterion::kRmse);
}
