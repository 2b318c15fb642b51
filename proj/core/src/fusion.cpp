#include "vra/fusion.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "vra/error.hpp"

namespace vra {

namespace {

/// Correctly rounded sum (Shewchuk partials), so pooled statistics do not
/// depend on frame order.
double exact_sum(const std::vector<double>& values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  // Sum the partials from the top, with the half-way correction.
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

}  // namespace

VideoFeatureVector fuse_mean_std(const FrameFeatureMatrix& matrix) {
  const std::size_t n = matrix.n_frames();
  const std::size_t d = matrix.width();
  if (n == 0 || d == 0) throw ValidationError("fuse: video '" + matrix.video_id() + "' has no frames");

  VideoFeatureVector out;
  out.video_id = matrix.video_id();
  out.feature_names.reserve(2 * d);
  for (const auto& name : matrix.feature_names()) out.feature_names.push_back(name + ".mean");
  for (const auto& name : matrix.feature_names()) out.feature_names.push_back(name + ".std");
  out.values.assign(2 * d, 0.0);

  std::vector<double> column(n);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) column[r] = matrix.rows()[r][c];
    const double mean = exact_sum(column) / static_cast<double>(n);
    for (auto& v : column) v = (v - mean) * (v - mean);
    const double ss = exact_sum(column);
    out.values[c] = mean;
    out.values[d + c] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  return out;
}

Dataset Dataset::subset_rows(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  out.records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(r);
    out.y(static_cast<Eigen::Index>(i)) = y(r);
    out.records.push_back(records[rows[i]]);
  }
  return out;
}

Dataset Dataset::subset_columns(const std::vector<std::size_t>& cols) const {
  Dataset out;
  out.records = records;
  out.y = y;
  out.X.resize(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= feature_names.size())
      throw ValidationError("column index " + std::to_string(cols[j]) + " out of range");
    out.X.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(cols[j]));
    out.feature_names.push_back(feature_names[cols[j]]);
  }
  return out;
}

Dataset consolidate(const std::vector<VideoFeatureVector>& vectors,
                    const std::vector<VideoRecord>& records) {
  Dataset ds;
  if (vectors.empty()) {
    if (!records.empty()) throw JoinError("no feature vectors for " + std::to_string(records.size()) + " records");
    return ds;
  }
  ds.feature_names = vectors.front().feature_names;

  std::unordered_map<std::string, const VideoFeatureVector*> by_id;
  for (const auto& v : vectors) {
    v.validate();
    if (v.feature_names != ds.feature_names)
      throw SchemaError("video '" + v.video_id + "' feature header differs from '" +
                        vectors.front().video_id + "'");
    if (!by_id.emplace(v.video_id, &v).second)
      throw DuplicateError("duplicate feature vector for video '" + v.video_id + "'");
  }
  std::unordered_set<std::string> record_ids;
  for (const auto& r : records) record_ids.insert(r.video_id);
  for (const auto& v : vectors) {
    if (!record_ids.contains(v.video_id))
      throw JoinError("no manifest record for video '" + v.video_id + "'");
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  const auto d = static_cast<Eigen::Index>(ds.feature_names.size());
  ds.X.resize(n, d);
  ds.y.resize(n);
  ds.records = records;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    const auto it = by_id.find(rec.video_id);
    if (it == by_id.end()) throw JoinError("no feature vector for video '" + rec.video_id + "'");
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = it->second->values[static_cast<std::size_t>(j)];
    ds.y(i) = rec.mos;
  }
  return ds;
}

std::vector<VideoRecord> select_subset(const std::vector<VideoRecord>& records, Subset subset) {
  std::vector<VideoRecord> out;
  for (const auto& r : records)
    if (r.subset == subset) out.push_back(r);
  return out;
}

std::vector<VideoFeatureVector> restrict_to(const std::vector<VideoFeatureVector>& vectors,
                                            const std::vector<VideoRecord>& records) {
  std::unordered_set<std::string> ids;
  for (const auto& r : records) ids.insert(r.video_id);
  std::vector<VideoFeatureVector> out;
  for (const auto& v : vectors)
    if (ids.contains(v.video_id)) out.push_back(v);
  return out;
}

}  // namespace vra
