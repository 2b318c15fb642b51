#include "vra/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "vra/error.hpp"
#include "vra/parallel.hpp"
#include "vra/random.hpp"

namespace vra {

namespace {

constexpr std::uint64_t kRandomSalt = 0x52414E44;

const std::string& group_of(const VideoRecord& r, Protocol p) {
  return p == Protocol::kFacialId ? r.facial_id_pair : r.submit_id;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Dataset prepare_selection(const Dataset& data, const SelectionResult& selection) {
  if (selection.selected_indices.size() == data.cols()) {
    bool identity = true;
    for (std::size_t j = 0; j < selection.selected_indices.size(); ++j)
      identity = identity && selection.selected_indices[j] == j;
    if (identity) return data;
  }
  return apply_selection(data, selection);
}

/// Scores one train/test partition; fills video, method and predictions.
void score_partition(IterationRecord& rec, const Dataset& train, const Dataset& test, const SvrParams& params,
                     PredictorKind predictor, std::uint64_t random_seed, bool keep_predictions) {
  std::vector<double> pred;
  if (predictor == PredictorKind::kRandom) {
    pred = random_predictions(test.rows(), random_seed);
  } else {
    const SvrModel model = train_svr(train.X, train.y, params);
    const Eigen::VectorXd p = predict(model, test.X);
    pred.assign(p.data(), p.data() + p.size());
  }
  const auto gt = as_span(test.y);

  try {
    rec.video = evaluate_level(pred, gt);
  } catch (const UndefinedMetricError& e) {
    rec.skip_reason = e.what();
    return;
  }

  std::vector<std::string> submits;
  submits.reserve(test.rows());
  for (const auto& r : test.records) submits.push_back(r.submit_id);
  try {
    const MethodLevel m = method_aggregate(pred, gt, submits);
    rec.method = evaluate_level(m.pred, m.gt);
  } catch (const UndefinedMetricError&) {
    // Method level undefined for this split; the video level still counts.
  }

  if (keep_predictions) {
    const auto remapped = rec.video->logistic.converged ? rec.video->logistic.apply(pred) : pred;
    for (std::size_t i = 0; i < test.rows(); ++i) {
      rec.predictions.push_back(
          {test.records[i].video_id, test.records[i].submit_id, gt[i], pred[i], remapped[i]});
    }
  }
}

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  return s;
}

void finalize(EvaluationReport& report) {
  report.skipped = 0;
  for (const auto& it : report.iterations)
    if (!it.video) ++report.skipped;
  report.video = aggregate_level(report.iterations, false);
  report.method = aggregate_level(report.iterations, true);
}

}  // namespace

Protocol parse_protocol(std::string_view text) {
  if (text == "facial-id" || text == "facial_id") return Protocol::kFacialId;
  if (text == "submit-id" || text == "submit_id") return Protocol::kSubmitId;
  if (text == "inter" || text == "inter-subset" || text == "inter_subset") return Protocol::kInterSubset;
  throw ConfigError("unknown protocol '" + std::string(text) + "' (expected facial-id, submit-id or inter)");
}

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::kFacialId:
      return "facial-id";
    case Protocol::kSubmitId:
      return "submit-id";
    case Protocol::kInterSubset:
      return "inter";
  }
  return "?";
}

SplitSpec make_split(const std::vector<VideoRecord>& records, Protocol protocol, std::uint64_t seed) {
  if (protocol == Protocol::kInterSubset) throw ValidationError("make_split: inter-subset has no random split");
  if (records.empty()) throw ValidationError("make_split: no records");
  for (const auto& r : records) {
    if (r.subset != records.front().subset)
      throw ValidationError("make_split: records span several subsets (" + std::string(to_string(r.subset)) +
                            " and " + std::string(to_string(records.front().subset)) + ")");
  }

  std::set<std::string> unique;
  for (const auto& r : records) unique.insert(group_of(r, protocol));
  std::vector<std::string> groups(unique.begin(), unique.end());
  const std::size_t n_held = protocol == Protocol::kFacialId ? kFacialIdHeldOut : kSubmitIdHeldOut;
  if (groups.size() <= n_held) {
    throw ValidationError("make_split: " + std::to_string(groups.size()) + " groups, need more than " +
                          std::to_string(n_held));
  }

  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::string>(groups));

  SplitSpec spec;
  spec.protocol = protocol;
  spec.seed = seed;
  spec.held_out.assign(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n_held));
  std::sort(spec.held_out.begin(), spec.held_out.end());
  const std::set<std::string> held(spec.held_out.begin(), spec.held_out.end());
  for (const auto& r : records) {
    (held.contains(group_of(r, protocol)) ? spec.test_ids : spec.train_ids).push_back(r.video_id);
  }
  return spec;
}

MethodLevel method_aggregate(std::span<const double> pred, std::span<const double> gt,
                             const std::vector<std::string>& submit_ids) {
  if (pred.size() != gt.size() || pred.size() != submit_ids.size())
    throw ShapeError("method_aggregate: vectors are not aligned");
  std::map<std::string, std::array<double, 3>> acc;  // sum pred, sum gt, count
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto& a = acc[submit_ids[i]];
    a[0] += pred[i];
    a[1] += gt[i];
    a[2] += 1.0;
  }
  if (acc.size() < 2)
    throw UndefinedMetricError("method level: need at least 2 submit ids, got " + std::to_string(acc.size()));
  MethodLevel out;
  for (const auto& [label, a] : acc) {
    out.labels.push_back(label);
    out.pred.push_back(a[0] / a[2]);
    out.gt.push_back(a[1] / a[2]);
  }
  return out;
}

LevelMetrics evaluate_level(std::span<const double> pred, std::span<const double> gt) {
  LevelMetrics m;
  m.n = pred.size();
  m.srcc = srcc(pred, gt);
  const LogisticResult fit = fit_logistic4(pred, gt);
  m.logistic = fit.fit;
  m.remap_fallback = fit.fallback;
  m.plcc = plcc(fit.remapped, gt);
  m.rmse = rmse(fit.remapped, gt);
  return m;
}

LevelAggregate aggregate_level(const std::vector<IterationRecord>& iterations, bool method_level) {
  std::vector<double> s;
  std::vector<double> p;
  std::vector<double> r;
  for (const auto& it : iterations) {
    const auto& level = method_level ? it.method : it.video;
    if (!level || !it.video) continue;
    s.push_back(level->srcc);
    p.push_back(level->plcc);
    r.push_back(level->rmse);
  }
  LevelAggregate a;
  a.srcc = summarize(s);
  a.plcc = summarize(p);
  a.rmse = summarize(r);
  a.count = static_cast<int>(s.size());
  return a;
}

std::vector<double> random_predictions(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(1.0, 5.0);
  return out;
}

EvaluationReport run_benchmark(const Dataset& data, Protocol protocol, const BenchmarkConfig& config,
                               std::string feature_model) {
  if (protocol == Protocol::kInterSubset)
    throw ValidationError("run_benchmark: use run_inter_subset for the inter protocol");
  if (config.iterations < 1) throw ValidationError("run_benchmark: iterations must be positive");

  const SelectionResult selection =
      config.select_features && data.cols() > kSelectionMinWidth
          ? select_features(data.X, data.y, config.selection, data.feature_names)
          : identity_selection(data.cols(), data.feature_names);
  const Dataset selected = prepare_selection(data, selection);

  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < selected.rows(); ++i) row_of[selected.records[i].video_id] = i;
  auto rows_for = [&](const std::vector<std::string>& ids) {
    std::vector<std::size_t> rows;
    rows.reserve(ids.size());
    for (const auto& id : ids) rows.push_back(row_of.at(id));
    return rows;
  };

  EvaluationReport report;
  report.protocol = protocol;
  report.feature_model = std::move(feature_model);
  report.predictor = config.predictor == PredictorKind::kRandom ? "random" : "svr";
  report.selected_features = selected.cols();
  report.iterations.resize(static_cast<std::size_t>(config.iterations));

  parallel_for(report.iterations.size(), config.jobs, [&](std::size_t i) {
    IterationRecord& rec = report.iterations[i];
    rec.seed = config.seed_base + i;
    rec.split = make_split(selected.records, protocol, rec.seed);
    const Dataset train = selected.subset_rows(rows_for(rec.split.train_ids));
    const Dataset test = selected.subset_rows(rows_for(rec.split.test_ids));

    SvrParams params = config.svr;
    if (config.predictor == PredictorKind::kSvr && config.search_hyperparameters) {
      const GridSearchResult g = grid_search(train.X, train.y, config.svr, config.grid, rec.seed);
      params.C = g.best_C;
      if (params.kernel.type == KernelType::kRbf) params.kernel = Kernel::rbf(g.best_gamma);
    }
    rec.C = params.C;
    rec.gamma = params.kernel.gamma;
    try {
      score_partition(rec, train, test, params, config.predictor, derive_seed(rec.seed, kRandomSalt),
                      config.keep_predictions);
    } catch (const ConvergenceError& e) {
      rec.video.reset();
      rec.method.reset();
      rec.skip_reason = e.what();
    }
  });

  finalize(report);
  return report;
}

EvaluationReport run_inter_subset(const Dataset& train, const Dataset& test, const SelectionResult& selection,
                                  const SvrParams& frozen, std::string feature_model, PredictorKind predictor,
                                  std::uint64_t seed) {
  if (train.feature_names != test.feature_names)
    throw SchemaError("inter-subset: training and test feature names differ");
  const Dataset tr = prepare_selection(train, selection);
  const Dataset te = prepare_selection(test, selection);

  EvaluationReport report;
  report.protocol = Protocol::kInterSubset;
  report.feature_model = std::move(feature_model);
  report.predictor = predictor == PredictorKind::kRandom ? "random" : "svr";
  report.selected_features = tr.cols();

  IterationRecord rec;
  rec.seed = seed;
  rec.split.protocol = Protocol::kInterSubset;
  rec.split.seed = seed;
  for (const auto& r : tr.records) rec.split.train_ids.push_back(r.video_id);
  for (const auto& r : te.records) rec.split.test_ids.push_back(r.video_id);
  rec.C = frozen.C;
  rec.gamma = frozen.kernel.gamma;
  score_partition(rec, tr, te, frozen, predictor, derive_seed(seed, kRandomSalt), true);
  report.iterations.push_back(std::move(rec));
  finalize(report);
  return report;
}

}  // namespace vra
