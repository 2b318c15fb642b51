#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vra/datamodel.hpp"
#include "vra/fusion.hpp"
#include "vra/metrics.hpp"
#include "vra/selection.hpp"
#include "vra/svr.hpp"

namespace vra {

enum class Protocol { kFacialId, kSubmitId, kInterSubset };

/// "facial-id", "submit-id", "inter".
Protocol parse_protocol(std::string_view text);
std::string_view to_string(Protocol p) noexcept;

/// Groups held out per intra-subset split.
constexpr std::size_t kFacialIdHeldOut = 4;
constexpr std::size_t kSubmitIdHeldOut = 3;
constexpr int kDefaultIterations = 100;

struct SplitSpec {
  Protocol protocol = Protocol::kFacialId;
  std::uint64_t seed = 0;
  std::vector<std::string> held_out;  ///< sorted group labels
  std::vector<std::string> train_ids;  ///< record order
  std::vector<std::string> test_ids;   ///< record order

  bool operator==(const SplitSpec&) const = default;
};

/// Group labels (facial_id_pair or submit_id) are sorted bytewise, shuffled
/// by Fisher-Yates driven by splitmix64(seed), and the first 4 (facial-id)
/// or 3 (submit-id) are held out. Throws ValidationError for the inter
/// protocol, mixed subsets, or too few groups.
SplitSpec make_split(const std::vector<VideoRecord>& records, Protocol protocol, std::uint64_t seed);

struct MethodLevel {
  std::vector<std::string> labels;  ///< sorted submit ids
  std::vector<double> pred;
  std::vector<double> gt;
};

/// Per-submit-id means of predictions and ground truth, ordered by label.
/// Throws UndefinedMetricError with fewer than 2 distinct submit ids.
MethodLevel method_aggregate(std::span<const double> pred, std::span<const double> gt,
                             const std::vector<std::string>& submit_ids);

struct LevelMetrics {
  double srcc = 0.0;  ///< on raw predictions
  double plcc = 0.0;  ///< on logistic-remapped predictions
  double rmse = 0.0;  ///< on logistic-remapped predictions
  LogisticFit logistic;
  bool remap_fallback = false;
  std::size_t n = 0;
};

/// SRCC on raw predictions; PLCC and RMSE after the four-parameter
/// logistic remap (identity when the fit falls back).
LevelMetrics evaluate_level(std::span<const double> pred, std::span<const double> gt);

struct PredictionRow {
  std::string video_id;
  std::string submit_id;
  double gt = 0.0;
  double pred = 0.0;
  double remapped = 0.0;
};

struct IterationRecord {
  std::uint64_t seed = 0;
  SplitSpec split;
  double C = 0.0;
  double gamma = 0.0;
  std::optional<LevelMetrics> video;
  std::optional<LevelMetrics> method;
  std::string skip_reason;  ///< non-empty when the video-level metrics are undefined
  std::vector<PredictionRow> predictions;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  ///< population std over the included iterations
};

struct LevelAggregate {
  MetricSummary srcc;
  MetricSummary plcc;
  MetricSummary rmse;
  int count = 0;  ///< iterations contributing
};

struct EvaluationReport {
  Protocol protocol = Protocol::kFacialId;
  std::string feature_model;
  std::string predictor = "svr";
  std::vector<IterationRecord> iterations;
  LevelAggregate video;
  LevelAggregate method;
  int skipped = 0;
  std::size_t selected_features = 0;
  std::string timestamp;  ///< metadata only
};

/// Mean/std over the non-skipped iterations at each level.
LevelAggregate aggregate_level(const std::vector<IterationRecord>& iterations, bool method_level);

enum class PredictorKind { kSvr, kRandom };

struct BenchmarkConfig {
  SvrParams svr{Kernel::rbf(0.1), 1.0, 0.1};
  SvrGrid grid;
  bool search_hyperparameters = true;  ///< per-iteration grid search; else svr.C / gamma as given
  PredictorKind predictor = PredictorKind::kSvr;
  int iterations = kDefaultIterations;
  std::uint64_t seed_base = 0;  ///< iteration i uses seed seed_base + i
  unsigned jobs = 1;
  bool select_features = true;  ///< run selection once when width > kSelectionMinWidth
  SelectionConfig selection;
  bool keep_predictions = false;
};

/// Intra-subset protocol: for each iteration, split by group, grid-search
/// and train on the training side, predict the test side and score at
/// video and method level.
EvaluationReport run_benchmark(const Dataset& data, Protocol protocol, const BenchmarkConfig& config,
                               std::string feature_model = {});

/// Trains once on `train` with frozen hyperparameters (and an already chosen
/// selection) and scores `test`. Throws SchemaError when the feature names of
/// the two sets differ.
EvaluationReport run_inter_subset(const Dataset& train, const Dataset& test, const SelectionResult& selection,
                                  const SvrParams& frozen, std::string feature_model = {},
                                  PredictorKind predictor = PredictorKind::kSvr, std::uint64_t seed = 0);

/// Uniform random scores in [1, 5] (the random-guesser baseline).
std::vector<double> random_predictions(std::size_t n, std::uint64_t seed);

}  // namespace vra
