#include "vra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "vra/error.hpp"
#include "vra/fusion.hpp"
#include "vra/random.hpp"

namespace vra {

namespace {

constexpr double kQualityLow = 1.5;
constexpr double kQualityHigh = 4.5;

std::string label(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
  return buf;
}

/// Monotone maps from the MOS scale, cycled over the informative columns.
double planted(std::size_t j, double q) {
  switch (j % 6) {
    case 0:
      return q;
    case 1:
      return std::log(q);
    case 2:
      return 0.25 * q * q;
    case 3:
      return -std::sqrt(q);
    case 4:
      return std::exp(q / 3.0);
    default:
      return std::tanh(q - 3.0);
  }
}

/// Column scale so per-video noise stays comparable across planted maps.
double slope_at_mid(std::size_t j) {
  const double h = 1e-4;
  return std::abs(planted(j, 3.0 + h) - planted(j, 3.0 - h)) / (2.0 * h);
}

}  // namespace

SynthDataset make_synthetic(const SynthConfig& c) {
  if (c.facial_pairs < 1 || c.clips_per_submission < 1 || c.frames_per_video < 1)
    throw ValidationError("synth: counts must be positive");
  if (c.informative_features + c.noise_features == 0) throw ValidationError("synth: no feature columns");

  SynthDataset out;
  SplitMix64 pair_rng(derive_seed(c.seed, 1));
  std::vector<double> pair_offset(c.facial_pairs);
  for (auto& v : pair_offset) v = pair_rng.normal(0.0, 0.15);

  std::vector<std::string> names;
  for (std::size_t j = 0; j < c.informative_features + c.noise_features; ++j) names.push_back(label("synth.f", j));

  struct SubsetSpec {
    Subset subset;
    const char* prefix;
    std::size_t submissions;
    std::uint64_t salt;
  };
  const SubsetSpec subsets[] = {{Subset::C3, "c3s", c.submissions_c3, 3},
                                {Subset::C1, "c1s", c.submissions_c1, 11},
                                {Subset::C2, "c2s", c.submissions_c2, 12}};

  for (const auto& spec : subsets) {
    if (spec.submissions == 0) continue;
    // Evenly spaced quality levels, assigned to submissions by a seeded shuffle.
    std::vector<double> levels(spec.submissions);
    for (std::size_t s = 0; s < spec.submissions; ++s) {
      levels[s] = spec.submissions == 1
                      ? 0.5 * (kQualityLow + kQualityHigh)
                      : kQualityLow + (kQualityHigh - kQualityLow) * static_cast<double>(s) /
                                          static_cast<double>(spec.submissions - 1);
    }
    SplitMix64 assign(derive_seed(c.seed, spec.salt));
    assign.shuffle(std::span<double>(levels));

    SplitMix64 rng(derive_seed(c.seed, spec.salt * 1000 + 7));
    for (std::size_t p = 0; p < c.facial_pairs; ++p) {
      for (std::size_t s = 0; s < spec.submissions; ++s) {
        for (std::size_t k = 0; k < c.clips_per_submission; ++k) {
          const std::string pair = label("fid", p);
          const std::string submit = label(spec.prefix, s);
          const std::string id = submit + "_" + pair + "_" + std::to_string(k);
          const double latent = levels[s] + pair_offset[p] + rng.normal(0.0, c.clip_noise);
          std::vector<int> ratings(kRatersPerVideo);
          for (auto& r : ratings) {
            const double v = std::round(latent + rng.normal(0.0, c.rater_noise));
            r = static_cast<int>(std::clamp(v, static_cast<double>(kMinRating), static_cast<double>(kMaxRating)));
          }
          VideoRecord rec = make_record(id, spec.subset, pair, submit, "videos/" + id + ".avi", std::move(ratings));

          std::vector<double> video_level(names.size());
          for (std::size_t j = 0; j < names.size(); ++j) {
            if (j < c.informative_features) {
              const double q = std::max(rec.mos + rng.normal(0.0, c.feature_noise), 0.5);
              video_level[j] = planted(j, q) / slope_at_mid(j);
            } else {
              video_level[j] = rng.normal();
            }
          }
          std::vector<std::vector<double>> rows(c.frames_per_video, std::vector<double>(names.size()));
          for (auto& row : rows)
            for (std::size_t j = 0; j < names.size(); ++j) row[j] = video_level[j] + rng.normal(0.0, c.frame_noise);

          out.frames.emplace_back(id, names, std::move(rows));
          out.latent_quality.push_back(latent);
          out.records.push_back(std::move(rec));
        }
      }
    }
  }

  SplitMix64 box_rng(derive_seed(c.seed, 2));
  for (std::size_t p = 0; p < c.facial_pairs; ++p) {
    BoxTrack track;
    track.video_id = label("fid", p);
    const int size = static_cast<int>(box_rng.uniform(0.2, 0.35) * c.frame_height);
    double cx = box_rng.uniform(0.35, 0.65) * c.frame_width;
    double cy = box_rng.uniform(0.35, 0.65) * c.frame_height;
    for (std::size_t f = 0; f < c.frames_per_video; ++f) {
      cx += box_rng.normal(0.0, 0.01 * c.frame_width);
      cy += box_rng.normal(0.0, 0.01 * c.frame_height);
      BoundingBox b;
      b.frame_index = static_cast<int>(f);
      b.w = size;
      b.h = size;
      b.x = std::clamp(static_cast<int>(std::lround(cx)) - size / 2, 0, c.frame_width - size);
      b.y = std::clamp(static_cast<int>(std::lround(cy)) - size / 2, 0, c.frame_height - size);
      track.boxes.push_back(b);
    }
    out.boxes.push_back(std::move(track));
  }
  return out;
}

void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir) {
  write_manifest(data.records, dir / "manifest.csv");
  std::vector<VideoFeatureVector> fused;
  fused.reserve(data.frames.size());
  for (const auto& m : data.frames) {
    write_features(m, dir / "frames" / (m.video_id() + ".csv"));
    fused.push_back(fuse_mean_std(m));
  }
  write_video_features(fused, dir / "features.csv");
  for (const auto& t : data.boxes) write_boxes(t, dir / "boxes" / (t.video_id + ".json"));
}

std::vector<cv::Mat> render_target_frames(const BoxTrack& track, int source_width, int source_height, int width,
                                          int height, std::uint64_t seed) {
  if (width < 1 || height < 1 || source_width < 1 || source_height < 1)
    throw ValidationError("render: frame sizes must be positive");
  const double sx = static_cast<double>(width) / source_width;
  const double sy = static_cast<double>(height) / source_height;
  SplitMix64 rng(seed);
  cv::Mat texture(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      texture.at<cv::Vec3b>(y, x) = {static_cast<unsigned char>(rng.below(256)),
                                     static_cast<unsigned char>(rng.below(256)),
                                     static_cast<unsigned char>(rng.below(256))};
  cv::GaussianBlur(texture, texture, cv::Size(5, 5), 1.5);

  std::vector<cv::Mat> frames;
  for (const auto& b : track.boxes) {
    cv::Mat f = texture.clone();
    const cv::Rect r(static_cast<int>(std::lround(b.x * sx)), static_cast<int>(std::lround(b.y * sy)),
                     std::max(1, static_cast<int>(std::lround(b.w * sx))),
                     std::max(1, static_cast<int>(std::lround(b.h * sy))));
    const cv::Rect clipped = r & cv::Rect(0, 0, width, height);
    cv::Mat roi = f(clipped);
    for (int y = 0; y < roi.rows; ++y)
      for (int x = 0; x < roi.cols; ++x) {
        const auto v = static_cast<unsigned char>(128 + 100 * std::sin(0.3 * x) * std::cos(0.2 * y));
        roi.at<cv::Vec3b>(y, x) = {v, static_cast<unsigned char>(255 - v), 200};
      }
    frames.push_back(std::move(f));
  }
  return frames;
}

RegressionProblem make_regression_problem(std::size_t rows, std::size_t cols, std::size_t informative,
                                          double noise, std::uint64_t seed) {
  if (informative > cols) throw ValidationError("regression problem: more informative columns than columns");
  SplitMix64 rng(seed);
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  RegressionProblem p;
  p.informative.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(informative));
  std::sort(p.informative.begin(), p.informative.end());
  std::vector<double> weights(informative);
  for (auto& w : weights) w = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(1.0, 2.0);

  p.X.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  p.y.resize(static_cast<Eigen::Index>(rows));
  for (Eigen::Index i = 0; i < p.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.X.cols(); ++j) p.X(i, j) = rng.normal();
    double t = rng.normal(0.0, noise);
    for (std::size_t k = 0; k < informative; ++k)
      t += weights[k] * p.X(i, static_cast<Eigen::Index>(p.informative[k]));
    p.y(i) = t;
  }
  return p;
}

}  // namespace vra
