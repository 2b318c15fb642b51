#include "vra/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "vra/error.hpp"
#include "vra/metrics.hpp"
#include "vra/parallel.hpp"
#include "vra/random.hpp"

namespace vra {

namespace {

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

Split random_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng(seed);
  rng.shuffle(std::span<std::size_t>(perm));
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n))), 1, n - 2);
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows,
                          const std::vector<std::size_t>* cols = nullptr) {
  const auto nc = cols ? static_cast<Eigen::Index>(cols->size()) : X.cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), nc);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    if (cols) {
      for (std::size_t j = 0; j < cols->size(); ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X(r, static_cast<Eigen::Index>((*cols)[j]));
    } else {
      out.row(static_cast<Eigen::Index>(i)) = X.row(r);
    }
  }
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
  return out;
}

bool is_constant(const Eigen::VectorXd& v) { return v.size() == 0 || (v.array() == v(0)).all(); }

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw ValidationError("selection: rows and targets differ");
  if (y.size() < 5) throw ValidationError("selection: need at least 5 rows");
  if (X.cols() < 1) throw ValidationError("selection: no features");
}

}  // namespace

std::vector<std::size_t> rank_by_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                            const SvrParams& svr) {
  check_inputs(X, y);
  SvrParams params = svr;
  params.kernel = Kernel::linear();
  const SvrModel model = train_svr(X, y, params);
  const Eigen::VectorXd w = linear_weights(model);
  std::vector<std::size_t> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(w(static_cast<Eigen::Index>(a))) > std::abs(w(static_cast<Eigen::Index>(b)));
  });
  return order;
}

std::vector<std::size_t> stage1_candidates(std::size_t width, std::size_t step) {
  if (step == 0) throw ValidationError("selection step must be positive");
  std::vector<std::size_t> out;
  for (std::size_t k = step; k < width; k += step) out.push_back(k);
  out.push_back(width);
  return out;
}

Stage1Result stage1_select_k(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const SelectionConfig& config) {
  check_inputs(X, y);
  const auto width = static_cast<std::size_t>(X.cols());
  if (width < config.step)
    throw ValidationError("stage 1: feature width " + std::to_string(width) + " is below the step " +
                          std::to_string(config.step));
  const auto candidates = stage1_candidates(width, config.step);
  const auto iterations = static_cast<std::size_t>(std::max(config.stage1_iterations, 0));

  // scores[it][c]; nullopt marks a skipped evaluation.
  std::vector<std::vector<std::optional<double>>> scores(iterations,
                                                         std::vector<std::optional<double>>(candidates.size()));
  std::vector<char> skipped(iterations, 0);
  parallel_for(iterations, config.jobs, [&](std::size_t it) {
    const Split split = random_split(static_cast<std::size_t>(y.size()), config.test_fraction, config.seed_base + it);
    const Eigen::VectorXd y_test = take(y, split.test);
    if (is_constant(y_test)) {
      skipped[it] = 1;
      return;
    }
    const Eigen::MatrixXd X_train = take_rows(X, split.train);
    const Eigen::VectorXd y_train = take(y, split.train);
    const auto ranking = rank_by_importance(X_train, y_train, config.svr);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<std::size_t> cols(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(candidates[c]));
      std::sort(cols.begin(), cols.end());
      SvrParams params = config.svr;
      params.kernel = Kernel::linear();
      const SvrModel model = train_svr(take_rows(X, split.train, &cols), y_train, params);
      const Eigen::VectorXd pred = predict(model, take_rows(X, split.test, &cols));
      try {
        scores[it][c] = plcc({pred.data(), static_cast<std::size_t>(pred.size())},
                             {y_test.data(), static_cast<std::size_t>(y_test.size())});
      } catch (const UndefinedMetricError&) {
      }
    }
  });

  Stage1Result result;
  result.skipped_iterations = static_cast<int>(std::count(skipped.begin(), skipped.end(), 1));
  std::optional<double> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    Stage1Point point{candidates[c], 0.0, 0};
    double sum = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
      if (scores[it][c]) {
        sum += *scores[it][c];
        ++point.valid_iterations;
      }
    }
    if (point.valid_iterations > 0) {
      point.mean_plcc = sum / point.valid_iterations;
      if (!best || point.mean_plcc > *best) {
        best = point.mean_plcc;
        result.k = point.k;
      }
    }
    result.curve.push_back(point);
  }
  if (!best) throw UndefinedMetricError("stage 1: every iteration was skipped");
  return result;
}

SelectionResult stage2_select(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::size_t k,
                              const SelectionConfig& config) {
  check_inputs(X, y);
  const auto width = static_cast<std::size_t>(X.cols());
  if (k < 1 || k > width)
    throw ValidationError("stage 2: k = " + std::to_string(k) + " outside [1, " + std::to_string(width) + "]");
  const auto iterations = static_cast<std::size_t>(std::max(config.stage2_iterations, 0));

  std::vector<std::vector<std::size_t>> top(iterations);
  std::vector<char> skipped(iterations, 0);
  parallel_for(iterations, config.jobs, [&](std::size_t it) {
    const Split split = random_split(static_cast<std::size_t>(y.size()), config.test_fraction, config.seed_base + it);
    const Eigen::VectorXd y_train = take(y, split.train);
    if (is_constant(y_train)) {
      skipped[it] = 1;
      return;
    }
    auto ranking = rank_by_importance(take_rows(X, split.train), y_train, config.svr);
    ranking.resize(k);
    top[it] = std::move(ranking);
  });

  SelectionResult result;
  result.k = k;
  result.frequency.assign(width, 0);
  result.stage2_iterations = static_cast<int>(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    if (skipped[it]) {
      ++result.skipped_iterations;
      continue;
    }
    for (std::size_t f : top[it]) ++result.frequency[f];
  }
  if (iterations > 0 && result.skipped_iterations == static_cast<int>(iterations))
    throw UndefinedMetricError("stage 2: every iteration was skipped");

  std::vector<std::size_t> order(width);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return result.frequency[a] > result.frequency[b]; });
  result.selected_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(result.selected_indices.begin(), result.selected_indices.end());
  return result;
}

SelectionResult select_features(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const SelectionConfig& config, const std::vector<std::string>& names) {
  if (!names.empty() && names.size() != static_cast<std::size_t>(X.cols()))
    throw ValidationError("selection: name count does not match width");
  const Stage1Result stage1 = stage1_select_k(X, y, config);
  SelectionResult result = stage2_select(X, y, stage1.k, config);
  result.stage1_scores = stage1.curve;
  result.skipped_iterations += stage1.skipped_iterations;
  for (std::size_t i : result.selected_indices)
    if (!names.empty()) result.selected_names.push_back(names[i]);
  return result;
}

Eigen::MatrixXd apply_selection(const Eigen::MatrixXd& X, const SelectionResult& result) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(result.selected_indices.size()));
  for (std::size_t j = 0; j < result.selected_indices.size(); ++j) {
    const std::size_t c = result.selected_indices[j];
    if (c >= static_cast<std::size_t>(X.cols()))
      throw ValidationError("apply_selection: index " + std::to_string(c) + " out of range for width " +
                            std::to_string(X.cols()));
    out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(c));
  }
  return out;
}

Dataset apply_selection(const Dataset& data, const SelectionResult& result) {
  for (std::size_t c : result.selected_indices) {
    if (c >= data.cols())
      throw ValidationError("apply_selection: index " + std::to_string(c) + " out of range for width " +
                            std::to_string(data.cols()));
  }
  return data.subset_columns(result.selected_indices);
}

SelectionResult identity_selection(std::size_t width, const std::vector<std::string>& names) {
  SelectionResult r;
  r.k = width;
  r.selected_indices.resize(width);
  std::iota(r.selected_indices.begin(), r.selected_indices.end(), 0);
  r.selected_names = names;
  r.frequency.assign(width, 0);
  return r;
}

}  // namespace vra
