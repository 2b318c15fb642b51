#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vra/fusion.hpp"
#include "vra/svr.hpp"

namespace vra {

struct SelectionConfig {
  /// Regressor used to rank features and score stage-1 candidates.
  SvrParams svr{Kernel::linear(), 0.1, 0.1};
  std::size_t step = 20;
  int stage1_iterations = 10;
  int stage2_iterations = 100;
  double test_fraction = 0.2;
  std::uint64_t seed_base = 0;
  unsigned jobs = 1;
};

/// Feature models wider than this go through selection; narrower ones pass through.
constexpr std::size_t kSelectionMinWidth = 1000;

struct Stage1Point {
  std::size_t k = 0;
  double mean_plcc = 0.0;
  int valid_iterations = 0;

  bool operator==(const Stage1Point&) const = default;
};

struct Stage1Result {
  std::size_t k = 0;
  std::vector<Stage1Point> curve;
  int skipped_iterations = 0;
};

struct SelectionResult {
  std::size_t k = 0;
  std::vector<std::size_t> selected_indices;  ///< ascending
  std::vector<std::string> selected_names;    ///< empty when names were not supplied
  std::vector<int> frequency;                 ///< per feature, over stage-2 iterations
  std::vector<Stage1Point> stage1_scores;     ///< empty when k was given directly
  int stage2_iterations = 0;
  int skipped_iterations = 0;

  bool operator==(const SelectionResult&) const = default;
};

/// Feature indices by descending |linear SVR weight|, ties by lower index.
std::vector<std::size_t> rank_by_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const SvrParams& svr);

/// {step, 2 step, ...} below D, always ending with D itself.
std::vector<std::size_t> stage1_candidates(std::size_t width, std::size_t step);

/// Picks the candidate k with the best mean test PLCC over seeded random
/// splits (iteration i uses seed seed_base + i). Splits with constant test
/// targets or undefined PLCC are skipped; ties go to the smaller k.
Stage1Result stage1_select_k(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const SelectionConfig& config);

/// Ranks on each seeded training split, counts top-k membership and keeps the
/// k most frequent features (ties by lower index).
SelectionResult stage2_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k,
                              const SelectionConfig& config);

/// Both stages. `names` (optional) fills selected_names.
SelectionResult select_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const SelectionConfig& config, const std::vector<std::string>& names = {});

/// Columns at selected_indices, ascending. Throws ValidationError on an
/// out-of-range index.
Eigen::MatrixXd apply_selection(const Eigen::MatrixXd& X, const SelectionResult& result);
Dataset apply_selection(const Dataset& data, const SelectionResult& result);

/// Pass-through result selecting every column.
SelectionResult identity_selection(std::size_t width, const std::vector<std::string>& names = {});

}  // namespace vra
