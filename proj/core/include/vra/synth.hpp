#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vra/datamodel.hpp"

namespace cv {
class Mat;
}

namespace vra {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t facial_pairs = 20;
  std::size_t clips_per_submission = 2;
  std::size_t submissions_c1 = 6;
  std::size_t submissions_c2 = 13;
  std::size_t submissions_c3 = 16;
  std::size_t frames_per_video = 8;
  std::size_t informative_features = 6;  ///< per-frame columns carrying the MOS signal
  std::size_t noise_features = 10;       ///< per-frame columns independent of MOS
  double feature_noise = 0.15;           ///< per-video noise on informative columns (MOS units)
  double frame_noise = 0.2;              ///< per-frame jitter on every column
  double rater_noise = 0.5;              ///< per-rating noise before rounding
  double clip_noise = 0.3;               ///< per-video latent quality noise
  int frame_width = 1920;                ///< source frame size used for boxes
  int frame_height = 1080;
};

struct SynthDataset {
  std::vector<VideoRecord> records;          ///< C3 first, then C1, C2
  std::vector<FrameFeatureMatrix> frames;    ///< one per record, same order
  std::vector<BoxTrack> boxes;               ///< one per facial-id pair (target video)
  std::vector<double> latent_quality;        ///< per record, before rating noise
};

/// Deterministic in `config`. Facial pairs are `fid00..`, submissions
/// `c3s00..` (and `c1s..`, `c2s..`). Submission quality levels are evenly
/// spaced over [1.5, 4.5] and assigned by a seeded shuffle. Informative
/// per-frame columns are monotone transforms of the latent quality plus
/// noise; the remaining columns are pure noise.
SynthDataset make_synthetic(const SynthConfig& config);

/// Writes manifest.csv, frames/<video_id>.csv, features.csv (mean/std fused,
/// all subsets) and boxes/<pair>.json under `dir`.
void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir);

/// Small textured frames with a bright square drifting along `track`'s
/// boxes, scaled to width x height. Used to exercise crop and extract.
std::vector<cv::Mat> render_target_frames(const BoxTrack& track, int source_width, int source_height, int width,
                                          int height, std::uint64_t seed);

struct RegressionProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::size_t> informative;  ///< ascending column indices
};

/// y = sum_j w_j X_ij over `informative` columns (weights in [1, 2]) plus
/// Gaussian noise; all columns i.i.d. standard normal. The informative
/// columns are a seeded random subset.
RegressionProblem make_regression_problem(std::size_t rows, std::size_t cols, std::size_t informative,
                                          double noise, std::uint64_t seed);

}  // namespace vra
