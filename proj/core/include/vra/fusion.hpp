#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "vra/datamodel.hpp"

namespace vra {

/// Mean and sample standard deviation pooling over frames, concatenated:
/// [mean_1..mean_d, std_1..std_d] with names suffixed `.mean` / `.std`.
/// A single frame yields a zero std block.
VideoFeatureVector fuse_mean_std(const FrameFeatureMatrix& matrix);

/// Video-level design matrix joined with manifest targets.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<VideoRecord> records;  ///< row order
  Eigen::MatrixXd X;                 ///< records.size() x feature_names.size()
  Eigen::VectorXd y;                 ///< MOS per row

  std::size_t rows() const noexcept { return records.size(); }
  std::size_t cols() const noexcept { return feature_names.size(); }

  /// Rows at the given positions, in that order.
  Dataset subset_rows(const std::vector<std::size_t>& rows) const;
  /// Columns at the given (ascending) positions.
  Dataset subset_columns(const std::vector<std::size_t>& cols) const;
};

/// Joins video vectors with manifest records; row order follows `records`.
/// Throws SchemaError when feature headers differ (including permutations),
/// JoinError when a vector has no record or a record has no vector.
Dataset consolidate(const std::vector<VideoFeatureVector>& vectors,
                    const std::vector<VideoRecord>& records);

/// Records (and, for the overload, vectors) belonging to one subset.
std::vector<VideoRecord> select_subset(const std::vector<VideoRecord>& records, Subset subset);
std::vector<VideoFeatureVector> restrict_to(const std::vector<VideoFeatureVector>& vectors,
                                            const std::vector<VideoRecord>& records);

}  // namespace vra
