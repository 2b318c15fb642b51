#include "vra/svr.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

#include "vra/error.hpp"
#include "vra/metrics.hpp"
#include "vra/random.hpp"

namespace vra {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw ValidationError("standardize_fit: empty matrix");
  Standardizer s;
  s.mean = X.colwise().mean().transpose();
  s.scale = Eigen::VectorXd::Zero(X.cols());
  if (X.rows() > 1) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double ss = (X.col(j).array() - s.mean(j)).square().sum();
      s.scale(j) = std::sqrt(ss / static_cast<double>(X.rows() - 1));
    }
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) {
    throw ShapeError("standardize_apply: matrix has " + std::to_string(X.cols()) + " columns, expected " +
                     std::to_string(mean.size()));
  }
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (scale(j) > 0.0)
      out.col(j) = (X.col(j).array() - mean(j)) / scale(j);
    else
      out.col(j).setZero();
  }
  return out;
}

namespace {

Eigen::MatrixXd kernel_matrix(const Kernel& kernel, const Eigen::MatrixXd& Z) {
  const Eigen::Index n = Z.rows();
  const Eigen::MatrixXd Zt = Z.transpose();  // contiguous rows
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(Zt.col(i), Zt.col(j));
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

// libsvm-style solver state for the 2n-variable epsilon-SVR dual:
//   min 0.5 a'Qa + p'a  s.t.  y'a = 0, 0 <= a <= C
// with a = [alpha; alpha*], y = [+1; -1], Q_ts = y_t y_s K(t mod n, s mod n),
// p = [eps - z; eps + z].
class SmoSolver {
 public:
  static constexpr double kTau = 1e-12;

  SmoSolver(const Eigen::MatrixXd& K, const Eigen::VectorXd& z, double C, double eps)
      : K_(K), n_(K.rows()), C_(C), alpha_(Eigen::VectorXd::Zero(2 * n_)), grad_(2 * n_), p_(2 * n_) {
    for (Eigen::Index i = 0; i < n_; ++i) {
      p_(i) = eps - z(i);
      p_(i + n_) = eps + z(i);
    }
    grad_ = p_;
  }

  double sign(Eigen::Index t) const noexcept { return t < n_ ? 1.0 : -1.0; }
  double q(Eigen::Index t, Eigen::Index s) const noexcept {
    return sign(t) * sign(s) * K_(t % n_, s % n_);
  }

  /// Maximal violating pair; returns the gap m - M.
  double select(Eigen::Index& i, Eigen::Index& j) const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    i = j = -1;
    // First half has sign +1, second half sign -1.
    for (Eigen::Index t = 0; t < n_; ++t) {
      const double v = -grad_(t);
      if (alpha_(t) < C_ && v > gmax) {
        gmax = v;
        i = t;
      }
      if (alpha_(t) > 0 && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    for (Eigen::Index t = n_; t < 2 * n_; ++t) {
      const double v = grad_(t);
      if (alpha_(t) > 0 && v > gmax) {
        gmax = v;
        i = t;
      }
      if (alpha_(t) < C_ && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i < 0 || j < 0) return 0.0;
    return gmax - gmin;
  }

  void update(Eigen::Index i, Eigen::Index j) {
    const double old_ai = alpha_(i);
    const double old_aj = alpha_(j);
    const double qii = q(i, i);
    const double qjj = q(j, j);
    const double qij = q(i, j);
    double& ai = alpha_(i);
    double& aj = alpha_(j);
    if (sign(i) != sign(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad_(i) - grad_(j)) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > 0) {
        if (ai > C_) {
          ai = C_;
          aj = C_ - diff;
        }
      } else if (aj > C_) {
        aj = C_;
        ai = C_ + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad_(i) - grad_(j)) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C_) {
        if (ai > C_) {
          ai = C_;
          aj = sum - C_;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > C_) {
        if (aj > C_) {
          aj = C_;
          ai = sum - C_;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    // K is symmetric, so its columns are the rows needed here.
    const Eigen::VectorXd change = (sign(i) * dai) * K_.col(i % n_) + (sign(j) * daj) * K_.col(j % n_);
    grad_.head(n_) += change;
    grad_.tail(n_) -= change;
  }

  /// Bias term rho (decision = sum beta K - rho), libsvm convention.
  double rho() const {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < 2 * n_; ++t) {
      const double yg = sign(t) * grad_(t);
      if (alpha_(t) >= C_) {
        if (sign(t) < 0)
          ub = std::min(ub, yg);
        else
          lb = std::max(lb, yg);
      } else if (alpha_(t) <= 0) {
        if (sign(t) > 0)
          ub = std::min(ub, yg);
        else
          lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  }

  double objective() const { return 0.5 * alpha_.dot(grad_ + p_); }

  Eigen::VectorXd beta() const { return alpha_.head(n_) - alpha_.tail(n_); }

 private:
  const Eigen::MatrixXd& K_;
  Eigen::Index n_;
  double C_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd grad_;
  Eigen::VectorXd p_;
};

void validate_training_input(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params) {
  if (X.rows() != y.size())
    throw ValidationError("train_svr: " + std::to_string(X.rows()) + " rows vs " + std::to_string(y.size()) + " targets");
  if (X.rows() < 2) throw ValidationError("train_svr: need at least 2 training rows");
  if (X.cols() < 1) throw ValidationError("train_svr: need at least 1 feature");
  if (!(params.C > 0.0)) throw ValidationError("train_svr: C must be positive");
  if (!(params.epsilon >= 0.0)) throw ValidationError("train_svr: epsilon must be non-negative");
  if (!(params.tolerance > 0.0)) throw ValidationError("train_svr: tolerance must be positive");
  if (params.kernel.type == KernelType::kRbf && !(params.kernel.gamma > 0.0))
    throw ValidationError("train_svr: RBF gamma must be positive");
  if (!X.allFinite() || !y.allFinite()) throw ValidationError("train_svr: non-finite value in inputs");
}

}  // namespace

SvrModel train_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params,
                   std::vector<std::string> feature_names) {
  validate_training_input(X, y, params);
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(X.cols()))
    throw ValidationError("train_svr: feature name count does not match width");

  SvrModel model;
  model.kernel = params.kernel;
  model.C = params.C;
  model.epsilon = params.epsilon;
  model.feature_names = std::move(feature_names);
  model.standardizer = Standardizer::fit(X);
  const Eigen::MatrixXd Z = model.standardizer.apply(X);
  const Eigen::MatrixXd K = kernel_matrix(params.kernel, Z);

  SmoSolver solver(K, y, params.C, params.epsilon);
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  std::int64_t iter = 0;
  double gap = solver.select(i, j);
  while (gap >= params.tolerance) {
    if (iter >= params.max_iterations) {
      throw ConvergenceError("SMO did not converge in " + std::to_string(params.max_iterations) +
                                 " iterations (KKT violation " + std::to_string(gap) + ")",
                             gap);
    }
    solver.update(i, j);
    ++iter;
    gap = solver.select(i, j);
  }

  const Eigen::VectorXd beta = solver.beta();
  for (Eigen::Index r = 0; r < beta.size(); ++r)
    if (beta(r) != 0.0) model.support_indices.push_back(static_cast<std::size_t>(r));
  const auto nsv = static_cast<Eigen::Index>(model.support_indices.size());
  model.support_vectors.resize(nsv, Z.cols());
  model.dual_coeffs.resize(nsv);
  for (Eigen::Index s = 0; s < nsv; ++s) {
    const auto r = static_cast<Eigen::Index>(model.support_indices[static_cast<std::size_t>(s)]);
    model.support_vectors.row(s) = Z.row(r);
    model.dual_coeffs(s) = beta(r);
  }
  model.bias = -solver.rho();
  model.kkt_violation = std::max(gap, 0.0);
  model.objective = solver.objective();
  model.iterations = iter;
  return model;
}

Eigen::VectorXd predict(const SvrModel& model, const Eigen::MatrixXd& X) {
  if (X.rows() == 0) return Eigen::VectorXd(0);
  if (X.cols() != model.standardizer.width()) {
    throw ShapeError("predict: input has " + std::to_string(X.cols()) + " features, model expects " +
                     std::to_string(model.standardizer.width()));
  }
  // Transposed copies keep every row contiguous.
  const Eigen::MatrixXd Zt = model.standardizer.apply(X).transpose();
  const Eigen::MatrixXd St = model.support_vectors.transpose();
  Eigen::VectorXd out(Zt.cols());
  for (Eigen::Index r = 0; r < Zt.cols(); ++r) {
    double f = model.bias;
    for (Eigen::Index s = 0; s < St.cols(); ++s) f += model.dual_coeffs(s) * model.kernel(St.col(s), Zt.col(r));
    out(r) = f;
  }
  return out;
}

Eigen::VectorXd predict(const SvrModel& model, const Eigen::MatrixXd& X,
                        const std::vector<std::string>& feature_names) {
  if (!model.feature_names.empty() && feature_names != model.feature_names)
    throw SchemaError("predict: feature names differ from the names the model was trained on");
  return predict(model, X);
}

Eigen::VectorXd linear_weights(const SvrModel& model) {
  if (model.kernel.type != KernelType::kLinear)
    throw KernelError("linear_weights: model uses an RBF kernel");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(model.standardizer.width());
  for (Eigen::Index s = 0; s < model.support_vectors.rows(); ++s)
    w += model.dual_coeffs(s) * model.support_vectors.row(s).transpose();
  return w;
}

// ---------------------------------------------------------------- grid search

bool GridSearchResult::operator==(const GridSearchResult& o) const {
  if (best_C != o.best_C || best_gamma != o.best_gamma || criterion != o.criterion ||
      fallback != o.fallback || points.size() != o.points.size())
    return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].C != o.points[i].C || points[i].gamma != o.points[i].gamma ||
        points[i].score != o.points[i].score)
      return false;
  }
  return true;
}

GridSearchResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& base,
                             const SvrGrid& grid, std::uint64_t seed) {
  if (grid.C.empty()) throw ValidationError("grid_search: empty C grid");
  const bool linear = base.kernel.type == KernelType::kLinear;
  if (!linear && grid.gamma.empty()) throw ValidationError("grid_search: empty gamma grid");
  if (y.size() < 5) throw ValidationError("grid_search: need at least 5 rows");
  if (X.rows() != y.size()) throw ValidationError("grid_search: rows and targets differ");

  const auto n = static_cast<std::size_t>(y.size());
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(kValidationFraction * static_cast<double>(n))), 1, n - 2);
  std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());

  auto take = [&](const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd Xs(static_cast<Eigen::Index>(rows.size()), X.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      Xs.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
      ys(static_cast<Eigen::Index>(k)) = y(static_cast<Eigen::Index>(rows[k]));
    }
    return std::pair{Xs, ys};
  };
  const auto [X_train, y_train] = take(train);
  const auto [X_val, y_val] = take(val);

  GridSearchResult result;
  const bool constant_val = (y_val.array() == y_val(0)).all();
  if (constant_val) {
    result.criterion = GridCriterion::kRmse;
    result.fallback = true;
  }

  std::vector<double> cs = grid.C;
  std::vector<double> gammas = linear ? std::vector<double>{0.0} : grid.gamma;
  std::sort(cs.begin(), cs.end());
  std::sort(gammas.begin(), gammas.end());

  std::optional<double> best_score;
  for (double c : cs) {
    for (double g : gammas) {
      SvrParams p = base;
      p.C = c;
      if (!linear) p.kernel = Kernel::rbf(g);
      GridPoint point{c, g, std::nullopt};
      try {
        const SvrModel m = train_svr(X_train, y_train, p);
        const Eigen::VectorXd pred = predict(m, X_val);
        const std::span<const double> ps(pred.data(), static_cast<std::size_t>(pred.size()));
        const std::span<const double> gs(y_val.data(), static_cast<std::size_t>(y_val.size()));
        // RMSE is negated so that larger is always better.
        point.score = constant_val ? -rmse(ps, gs) : plcc(ps, gs);
      } catch (const UndefinedMetricError&) {
      } catch (const ConvergenceError&) {
      }
      if (point.score && (!best_score || *point.score > *best_score)) {
        best_score = point.score;
        result.best_C = c;
        result.best_gamma = g;
      }
      result.points.push_back(point);
    }
  }
  if (!best_score) {
    // Every point undefined: fall back to the smallest grid values.
    result.best_C = cs.front();
    result.best_gamma = gammas.front();
  }
  return result;
}

}  // namespace vra
