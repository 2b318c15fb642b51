#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vra {

enum class Subset { C1, C2, C3 };

std::string_view to_string(Subset s) noexcept;
/// Parses "C1" / "C2" / "C3"; std::nullopt otherwise.
std::optional<Subset> parse_subset(std::string_view text) noexcept;

/// One annotated face-swap clip.
struct VideoRecord {
  std::string video_id;
  Subset subset = Subset::C3;
  std::string facial_id_pair;
  std::string submit_id;
  std::string path;
  std::vector<int> ratings;
  double mos = 0.0;
  double mos_std = 0.0;

  bool operator==(const VideoRecord&) const = default;
};

/// Mean and sample (n-1) standard deviation of integer ratings in [1, 5].
/// Throws ValidationError on an empty list or an out-of-range rating.
std::pair<double, double> rating_statistics(const std::vector<int>& ratings);

/// Builds a record and fills mos / mos_std from the ratings.
VideoRecord make_record(std::string video_id, Subset subset, std::string facial_id_pair,
                        std::string submit_id, std::string path, std::vector<int> ratings);

constexpr int kMinRating = 1;
constexpr int kMaxRating = 5;
constexpr std::size_t kRatersPerVideo = 5;
/// Allowed disagreement between a manifest's precomputed mos column and the ratings.
constexpr double kMosTolerance = 1e-6;

/// Reads the manifest CSV
/// `video_id,subset,facial_id_pair,submit_id,path,r1,r2,r3,r4,r5[,mos]`.
/// Throws ParseError (with line number) on malformed rows and DuplicateError
/// on a repeated video_id.
std::vector<VideoRecord> load_manifest(const std::filesystem::path& path);
std::vector<VideoRecord> parse_manifest(std::string_view text, const std::string& source = "<manifest>");

/// Writes a manifest including the mos column at full precision.
void write_manifest(const std::vector<VideoRecord>& records, const std::filesystem::path& path);
std::string format_manifest(const std::vector<VideoRecord>& records);

/// Per-frame features for one video: n_frames x d, row-major.
class FrameFeatureMatrix {
 public:
  FrameFeatureMatrix() = default;
  /// Validates names (unique, non-empty), row widths and finiteness.
  FrameFeatureMatrix(std::string video_id, std::vector<std::string> feature_names,
                     std::vector<std::vector<double>> rows);

  const std::string& video_id() const noexcept { return video_id_; }
  const std::vector<std::string>& feature_names() const noexcept { return names_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  std::size_t n_frames() const noexcept { return rows_.size(); }
  std::size_t width() const noexcept { return names_.size(); }

  bool operator==(const FrameFeatureMatrix&) const = default;

 private:
  std::string video_id_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> rows_;
};

/// Video-level features after fusion (or ingested as video-native features).
struct VideoFeatureVector {
  std::string video_id;
  std::vector<std::string> feature_names;
  std::vector<double> values;

  /// Throws ValidationError if lengths disagree or any value is non-finite.
  void validate() const;
  bool operator==(const VideoFeatureVector&) const = default;
};

/// Frame CSV: header = feature names, one row per frame. The video id is
/// carried by the file stem.
void write_features(const FrameFeatureMatrix& matrix, const std::filesystem::path& path);
FrameFeatureMatrix load_features(const std::filesystem::path& path);
FrameFeatureMatrix parse_features(std::string_view text, std::string video_id,
                                  const std::string& source = "<features>");
std::string format_features(const FrameFeatureMatrix& matrix);

/// Consolidated CSV: `video_id` column followed by the feature columns, one
/// row per video.
void write_video_features(const std::vector<VideoFeatureVector>& vectors,
                          const std::filesystem::path& path);
std::vector<VideoFeatureVector> load_video_features(const std::filesystem::path& path);
std::vector<VideoFeatureVector> parse_video_features(std::string_view text,
                                                     const std::string& source = "<features>");
std::string format_video_features(const std::vector<VideoFeatureVector>& vectors);

struct BoundingBox {
  int frame_index = 0;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  bool operator==(const BoundingBox&) const = default;
};

struct BoxTrack {
  std::string video_id;
  std::vector<BoundingBox> boxes;  ///< ascending frame_index
};

/// Box JSON: {"video_id": str, "boxes": [{"frame","x","y","w","h"}, ...]}.
BoxTrack load_boxes(const std::filesystem::path& path);
BoxTrack parse_boxes(std::string_view json_text, const std::string& source = "<boxes>");
void write_boxes(const BoxTrack& track, const std::filesystem::path& path);

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace vra
