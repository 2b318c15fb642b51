#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vra {

/// Fractional (average) ranks, 1-based; tied values share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank-order correlation: Pearson correlation of average ranks.
/// Requires equal lengths >= 3 and non-constant gt; throws ShapeError /
/// UndefinedMetricError otherwise (also when pred is constant).
double srcc(std::span<const double> pred, std::span<const double> gt);

/// Pearson linear correlation. Throws UndefinedMetricError when either input
/// is constant or shorter than 2, ShapeError on a length mismatch.
double plcc(std::span<const double> pred, std::span<const double> gt);

/// Root mean square error with 1/n inside the root.
double rmse(std::span<const double> pred, std::span<const double> gt);

/// Monotone four-parameter logistic
/// L(x) = beta2 + (beta1 - beta2) / (1 + exp(-(x - beta3) / |beta4|)).
struct LogisticFit {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
  double beta4 = 1.0;
  bool converged = true;  ///< false: identity fallback was used

  double operator()(double x) const noexcept;
  std::vector<double> apply(std::span<const double> x) const;
};

struct LogisticResult {
  LogisticFit fit;
  std::vector<double> remapped;
  bool fallback = false;  ///< optimizer failed or input too short; remapped = pred
};

constexpr std::size_t kLogisticMinPoints = 5;
constexpr int kLogisticRestarts = 10;

/// Least-squares fit of L(pred) to gt by Nelder-Mead with restarts,
/// initialized at (max gt, min gt, median pred, std pred). Falls back to an
/// identity remap (flagged) when there are fewer than 5 points, pred is
/// constant, or the optimizer produces a non-finite result.
LogisticResult fit_logistic4(std::span<const double> pred, std::span<const double> gt);

/// Generic Nelder-Mead minimizer used by the logistic fit.
struct NelderMeadOptions {
  int max_evaluations = 20000;
  double f_tolerance = 1e-15;   ///< stop when the simplex value spread is below this
  double x_tolerance = 1e-12;   ///< and the simplex diameter is below this
  double initial_step = 0.1;    ///< relative (or absolute for zero coordinates)
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace vra
