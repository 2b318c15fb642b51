#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vra {

enum class KernelType { kLinear, kRbf };

struct Kernel {
  KernelType type = KernelType::kRbf;
  double gamma = 0.0;  ///< RBF only

  static Kernel linear() noexcept { return {KernelType::kLinear, 0.0}; }
  static Kernel rbf(double gamma) noexcept { return {KernelType::kRbf, gamma}; }

  template <typename A, typename B>
  double operator()(const A& a, const B& b) const {
    if (type == KernelType::kLinear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
  }

  bool operator==(const Kernel&) const = default;
};

/// Per-feature z-scoring with training statistics (sample std). Columns with
/// zero variance map to 0.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  ///< std per column; 0 marks a constant column

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::Index width() const noexcept { return mean.size(); }
};

struct SvrParams {
  Kernel kernel = Kernel::rbf(0.1);
  double C = 1.0;
  double epsilon = 0.1;
  double tolerance = 1e-3;         ///< KKT gap at which SMO stops
  std::int64_t max_iterations = 1'000'000;
};

/// Trained epsilon-SVR. Support vectors are stored in standardized space.
struct SvrModel {
  Kernel kernel;
  double C = 1.0;
  double epsilon = 0.1;
  Standardizer standardizer;
  Eigen::MatrixXd support_vectors;   ///< one row per support vector
  Eigen::VectorXd dual_coeffs;       ///< alpha_i - alpha*_i per support vector
  std::vector<std::size_t> support_indices;  ///< training rows of the support vectors
  double bias = 0.0;
  std::vector<std::string> feature_names;  ///< empty when trained without names

  // Solver diagnostics.
  double kkt_violation = 0.0;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

/// Solves the epsilon-SVR dual by SMO with maximal-violating-pair working
/// set selection. Throws ValidationError on bad shapes/parameters or NaN
/// inputs, ConvergenceError when max_iterations is reached.
SvrModel train_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params,
                   std::vector<std::string> feature_names = {});

/// f(x) = sum_i dual_i K(sv_i, std(x)) + bias. Throws ShapeError on a width mismatch.
Eigen::VectorXd predict(const SvrModel& model, const Eigen::MatrixXd& X);
/// As above, additionally requiring `feature_names` to match the training names.
Eigen::VectorXd predict(const SvrModel& model, const Eigen::MatrixXd& X,
                        const std::vector<std::string>& feature_names);

/// w = sum_i dual_i sv_i (standardized space). Throws KernelError for RBF models.
Eigen::VectorXd linear_weights(const SvrModel& model);

// ---------------------------------------------------------------- grid search

struct SvrGrid {
  std::vector<double> C = {0.1, 1.0, 10.0, 100.0, 1000.0};
  std::vector<double> gamma = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
};

enum class GridCriterion { kPlcc, kRmse };

struct GridPoint {
  double C = 0.0;
  double gamma = 0.0;
  std::optional<double> score;  ///< empty when undefined (constant predictions, no convergence)
};

struct GridSearchResult {
  double best_C = 0.0;
  double best_gamma = 0.0;
  GridCriterion criterion = GridCriterion::kPlcc;
  bool fallback = false;  ///< validation targets were constant; RMSE used instead of PLCC
  std::vector<GridPoint> points;  ///< sorted by (C, gamma)

  bool operator==(const GridSearchResult&) const;
};

/// Fraction of the training rows held out for validation.
constexpr double kValidationFraction = 0.2;

/// Holds out a seeded random 20% of the rows, trains on the rest for every
/// grid point and scores validation PLCC (higher is better). Ties go to the
/// smaller C, then the smaller gamma. For linear kernels the gamma axis is
/// collapsed to a single 0 entry. The caller retrains on all rows.
GridSearchResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& base,
                             const SvrGrid& grid, std::uint64_t seed);

}  // namespace vra
