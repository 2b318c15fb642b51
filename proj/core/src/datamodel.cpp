#include "vra/datamodel.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "vra/error.hpp"

namespace vra {

namespace {

constexpr std::array<std::string_view, 10> kManifestColumns = {
    "video_id", "subset", "facial_id_pair", "submit_id", "path", "r1", "r2", "r3", "r4", "r5"};

std::string join_names(const auto& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ",";
    out += n;
  }
  return out;
}

void check_feature_names(const std::vector<std::string>& names, const std::string& where) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw ValidationError(where + ": empty feature name");
    if (!seen.insert(n).second) throw ValidationError(where + ": duplicate feature name '" + n + "'");
  }
}

}  // namespace

std::string_view to_string(Subset s) noexcept {
  switch (s) {
    case Subset::C1: return "C1";
    case Subset::C2: return "C2";
    case Subset::C3: return "C3";
  }
  return "C3";
}

std::optional<Subset> parse_subset(std::string_view text) noexcept {
  if (text == "C1") return Subset::C1;
  if (text == "C2") return Subset::C2;
  if (text == "C3") return Subset::C3;
  return std::nullopt;
}

std::pair<double, double> rating_statistics(const std::vector<int>& ratings) {
  if (ratings.empty()) throw ValidationError("no ratings");
  for (int r : ratings) {
    if (r < kMinRating || r > kMaxRating)
      throw ValidationError("rating " + std::to_string(r) + " outside [1,5]");
  }
  const double n = static_cast<double>(ratings.size());
  const double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / n;
  if (ratings.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (int r : ratings) ss += (r - mean) * (r - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

VideoRecord make_record(std::string video_id, Subset subset, std::string facial_id_pair,
                        std::string submit_id, std::string path, std::vector<int> ratings) {
  VideoRecord rec{std::move(video_id), subset,      std::move(facial_id_pair),
                  std::move(submit_id), std::move(path), std::move(ratings)};
  std::tie(rec.mos, rec.mos_std) = rating_statistics(rec.ratings);
  return rec;
}

// ---------------------------------------------------------------- manifest

std::vector<VideoRecord> parse_manifest(std::string_view text, const std::string& source) {
  const auto lines = csv::parse(text, source);
  if (lines.empty()) throw ParseError(source, 1, "missing manifest header");

  const auto& header = lines.front().fields;
  const bool has_mos = header.size() == kManifestColumns.size() + 1;
  const bool header_ok =
      (header.size() == kManifestColumns.size() || has_mos) &&
      std::equal(kManifestColumns.begin(), kManifestColumns.end(), header.begin()) &&
      (!has_mos || header.back() == "mos");
  if (!header_ok) {
    throw ParseError(source, lines.front().number,
                     "manifest header must be '" + join_names(kManifestColumns) +
                         "[,mos]', got '" + join_names(header) + "'");
  }

  std::vector<VideoRecord> records;
  std::unordered_set<std::string> ids;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& [number, f] = lines[li];
    if (f.size() != header.size()) {
      throw ParseError(source, number,
                       "expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(f.size()));
    }
    if (f[0].empty()) throw ParseError(source, number, "empty video_id");
    const auto subset = parse_subset(f[1]);
    if (!subset) throw ParseError(source, number, "unknown subset '" + f[1] + "'");

    std::vector<int> ratings;
    for (std::size_t c = 5; c < 10; ++c) {
      int r = 0;
      if (!csv::to_int(f[c], r)) throw ParseError(source, number, "rating '" + f[c] + "' is not an integer");
      if (r < kMinRating || r > kMaxRating)
        throw ParseError(source, number, "rating " + std::to_string(r) + " outside [1,5]");
      ratings.push_back(r);
    }
    VideoRecord rec = make_record(f[0], *subset, f[2], f[3], f[4], std::move(ratings));
    if (has_mos && !f[10].empty()) {
      double mos = 0.0;
      if (!csv::to_double(f[10], mos) || !std::isfinite(mos))
        throw ParseError(source, number, "mos '" + f[10] + "' is not a finite number");
      if (std::abs(mos - rec.mos) > kMosTolerance) {
        throw ParseError(source, number,
                         "mos " + f[10] + " disagrees with ratings mean " + format_double(rec.mos));
      }
      rec.mos = mos;
    }
    if (!ids.insert(rec.video_id).second)
      throw DuplicateError(source + ":" + std::to_string(number) + ": duplicate video_id '" +
                           rec.video_id + "'");
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<VideoRecord> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.string());
}

std::string format_manifest(const std::vector<VideoRecord>& records) {
  std::string out;
  std::vector<std::string> header(kManifestColumns.begin(), kManifestColumns.end());
  header.emplace_back("mos");
  csv::append_row(out, header);
  for (const auto& r : records) {
    if (r.ratings.size() != kRatersPerVideo)
      throw ValidationError("record '" + r.video_id + "' must carry exactly 5 ratings");
    std::vector<std::string> row = {r.video_id, std::string(to_string(r.subset)), r.facial_id_pair,
                                    r.submit_id, r.path};
    for (int v : r.ratings) row.push_back(std::to_string(v));
    row.push_back(format_double(r.mos));
    csv::append_row(out, row);
  }
  return out;
}

void write_manifest(const std::vector<VideoRecord>& records, const std::filesystem::path& path) {
  write_text_file(path, format_manifest(records));
}

// ---------------------------------------------------------------- features

FrameFeatureMatrix::FrameFeatureMatrix(std::string video_id, std::vector<std::string> feature_names,
                                       std::vector<std::vector<double>> rows)
    : video_id_(std::move(video_id)), names_(std::move(feature_names)), rows_(std::move(rows)) {
  const std::string where = "frame features '" + video_id_ + "'";
  if (names_.empty()) throw ValidationError(where + ": no feature columns");
  if (rows_.empty()) throw ValidationError(where + ": no frames");
  check_feature_names(names_, where);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != names_.size()) {
      throw ValidationError(where + ": frame " + std::to_string(i) + " has " +
                            std::to_string(rows_[i].size()) + " values, expected " +
                            std::to_string(names_.size()));
    }
    for (double v : rows_[i]) {
      if (!std::isfinite(v))
        throw ValidationError(where + ": non-finite value in frame " + std::to_string(i));
    }
  }
}

void VideoFeatureVector::validate() const {
  const std::string where = "video features '" + video_id + "'";
  if (feature_names.size() != values.size()) {
    throw ValidationError(where + ": " + std::to_string(feature_names.size()) + " names vs " +
                          std::to_string(values.size()) + " values");
  }
  check_feature_names(feature_names, where);
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
  }
}

namespace {

std::vector<double> parse_value_row(const csv::Line& line, std::size_t first, std::size_t width,
                                    const std::string& source) {
  if (line.fields.size() != first + width) {
    throw FormatError(source + ":" + std::to_string(line.number) + ": row has " +
                      std::to_string(line.fields.size() - first) + " values under a " +
                      std::to_string(width) + "-name header");
  }
  std::vector<double> values(width);
  for (std::size_t c = 0; c < width; ++c) {
    const auto& text = line.fields[first + c];
    if (!csv::to_double(text, values[c]) || !std::isfinite(values[c])) {
      throw FormatError(source + ":" + std::to_string(line.number) + ": value '" + text +
                        "' is not a finite number");
    }
  }
  return values;
}

}  // namespace

FrameFeatureMatrix parse_features(std::string_view text, std::string video_id,
                                  const std::string& source) {
  const auto lines = csv::parse(text, source);
  if (lines.empty()) throw FormatError(source + ": missing feature header");
  const auto& names = lines.front().fields;
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i)
    rows.push_back(parse_value_row(lines[i], 0, names.size(), source));
  try {
    return FrameFeatureMatrix(std::move(video_id), names, std::move(rows));
  } catch (const ValidationError& e) {
    throw FormatError(source + ": " + e.what());
  }
}

FrameFeatureMatrix load_features(const std::filesystem::path& path) {
  return parse_features(read_text_file(path), path.stem().string(), path.string());
}

std::string format_features(const FrameFeatureMatrix& matrix) {
  std::string out;
  csv::append_row(out, matrix.feature_names());
  std::vector<std::string> row;
  for (const auto& r : matrix.rows()) {
    row.clear();
    for (double v : r) row.push_back(format_double(v));
    csv::append_row(out, row);
  }
  return out;
}

void write_features(const FrameFeatureMatrix& matrix, const std::filesystem::path& path) {
  write_text_file(path, format_features(matrix));
}

std::vector<VideoFeatureVector> parse_video_features(std::string_view text, const std::string& source) {
  const auto lines = csv::parse(text, source);
  if (lines.empty()) throw FormatError(source + ": missing feature header");
  const auto& header = lines.front().fields;
  if (header.empty() || header.front() != "video_id")
    throw FormatError(source + ": consolidated feature header must start with 'video_id'");
  std::vector<std::string> names(header.begin() + 1, header.end());
  try {
    check_feature_names(names, source);
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }

  std::vector<VideoFeatureVector> out;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    VideoFeatureVector v{line.fields.front(), names, parse_value_row(line, 1, names.size(), source)};
    if (v.video_id.empty())
      throw FormatError(source + ":" + std::to_string(line.number) + ": empty video_id");
    if (!ids.insert(v.video_id).second)
      throw DuplicateError(source + ":" + std::to_string(line.number) + ": duplicate video_id '" +
                           v.video_id + "'");
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<VideoFeatureVector> load_video_features(const std::filesystem::path& path) {
  return parse_video_features(read_text_file(path), path.string());
}

std::string format_video_features(const std::vector<VideoFeatureVector>& vectors) {
  std::string out;
  if (vectors.empty()) {
    out = "video_id\n";
    return out;
  }
  std::vector<std::string> header = {"video_id"};
  header.insert(header.end(), vectors.front().feature_names.begin(),
                vectors.front().feature_names.end());
  csv::append_row(out, header);
  std::vector<std::string> row;
  for (const auto& v : vectors) {
    v.validate();
    if (v.feature_names != vectors.front().feature_names)
      throw SchemaError("video '" + v.video_id + "' has a different feature header");
    row.assign({v.video_id});
    for (double x : v.values) row.push_back(format_double(x));
    csv::append_row(out, row);
  }
  return out;
}

void write_video_features(const std::vector<VideoFeatureVector>& vectors,
                          const std::filesystem::path& path) {
  write_text_file(path, format_video_features(vectors));
}

// ---------------------------------------------------------------- boxes

BoxTrack parse_boxes(std::string_view json_text, const std::string& source) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  auto require = [&](const json& obj, const char* key, const std::string& where) -> const json& {
    if (!obj.is_object() || !obj.contains(key))
      throw ParseError(source + ": " + where + " is missing field '" + key + "'");
    return obj.at(key);
  };
  auto as_int = [&](const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer())
      throw ParseError(source + ": " + where + " field '" + key + "' must be an integer");
    return v.get<int>();
  };

  BoxTrack track;
  const json& id = require(doc, "video_id", "document");
  if (!id.is_string()) throw ParseError(source + ": 'video_id' must be a string");
  track.video_id = id.get<std::string>();
  const json& boxes = require(doc, "boxes", "document");
  if (!boxes.is_array()) throw ParseError(source + ": 'boxes' must be an array");
  if (boxes.empty()) throw ValidationError(source + ": no boxes for video '" + track.video_id + "'");

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string where = "boxes[" + std::to_string(i) + "]";
    BoundingBox b{as_int(boxes[i], "frame", where), as_int(boxes[i], "x", where),
                  as_int(boxes[i], "y", where), as_int(boxes[i], "w", where),
                  as_int(boxes[i], "h", where)};
    if (b.frame_index < 0) throw ValidationError(source + ": " + where + " has a negative frame index");
    if (b.w <= 0 || b.h <= 0)
      throw ValidationError(source + ": " + where + " has a non-positive extent");
    track.boxes.push_back(b);
  }
  std::stable_sort(track.boxes.begin(), track.boxes.end(),
                   [](const BoundingBox& a, const BoundingBox& b) { return a.frame_index < b.frame_index; });
  return track;
}

BoxTrack load_boxes(const std::filesystem::path& path) {
  return parse_boxes(read_text_file(path), path.string());
}

void write_boxes(const BoxTrack& track, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["video_id"] = track.video_id;
  doc["boxes"] = nlohmann::json::array();
  for (const auto& b : track.boxes)
    doc["boxes"].push_back({{"frame", b.frame_index}, {"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
  write_text_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------- io

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace vra
