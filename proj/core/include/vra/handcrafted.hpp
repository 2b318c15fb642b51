#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vra/datamodel.hpp"
#include "vra/image.hpp"

namespace vra {

/// Generalized Gaussian fit (zero mean).
struct GgdFit {
  double shape = 0.0;
  double variance = 0.0;
};

/// Asymmetric generalized Gaussian fit.
struct AggdFit {
  double shape = 0.0;
  double mean = 0.0;
  double sigma_left = 0.0;
  double sigma_right = 0.0;
};

constexpr double kShapeGridMin = 0.2;
constexpr double kShapeGridMax = 10.0;
constexpr double kShapeGridStep = 0.001;
constexpr std::size_t kMinFitSamples = 100;

/// MSCN window and stabilizer on the [0, 255] scale.
constexpr int kMscnRadius = 3;  // 7x7
constexpr double kMscnSigma = 7.0 / 6.0;
constexpr double kMscnStabilizer = 1.0;
constexpr int kMscnMinSide = 16;

/// Mean-subtracted contrast-normalized coefficients
/// (I - mu) / (sigma + C) with a Gaussian-weighted local mean and deviation
/// and replicated borders. Exactly zero on constant images.
/// Throws ValidationError for images smaller than 16x16.
LumaImage mscn(const LumaImage& image);

/// Moment-matching estimates via the gamma-ratio lookup table on
/// [0.2, 10] with step 0.001. Throw ValidationError with fewer than 100
/// samples and DegenerateError when all samples are identical.
GgdFit fit_ggd(std::span<const double> samples);
AggdFit fit_aggd(std::span<const double> samples);

/// Gamma ratio r(a) = Gamma(2/a)^2 / (Gamma(1/a) Gamma(3/a)).
double ggd_moment_ratio(double shape);

// ---------------------------------------------------------------- BRISQUE

constexpr std::size_t kBrisqueFrameDims = 36;
constexpr int kBrisqueMinSide = 2 * kMscnMinSide;

/// 36 features per frame. Per scale (original, then 2x2 box-averaged):
/// GGD (shape, variance) of the MSCN map followed by AGGD (shape, mean,
/// left variance, right variance) of the H, V, D1, D2 neighbour products.
std::vector<double> brisque_frame(const LumaImage& image);
const std::vector<std::string>& brisque_feature_names();

/// 2x2 box average; odd trailing rows/columns are dropped.
LumaImage downsample_box2(const LumaImage& image);

// ---------------------------------------------------------------- GM-LOG

struct GmlogConfig {
  double filter_sigma = 0.5;       ///< Gaussian derivative / LoG scale
  double norm_sigma = 1.0;         ///< joint adaptive normalization window
  double stabilizer = 0.2;         ///< added to the normalization map
  int levels = 10;                 ///< quantization levels per map
  double gm_range = 1.0;           ///< normalized GM values >= this land in the top bin
  double log_range = 2.5;          ///< same for |normalized LoG|
};

constexpr std::size_t kGmlogFrameDims = 40;
constexpr int kGmlogMinSide = 16;

/// 40 features per frame: GM marginal (10), LoG marginal (10), then the
/// averaged conditional distributions of GM given LoG (10) and of LoG given
/// GM (10), all derived from a normalized 10x10 joint histogram.
std::vector<double> gmlog_frame(const LumaImage& image, const GmlogConfig& config = {});
const std::vector<std::string>& gmlog_feature_names();

// ---------------------------------------------------------------- dispatch

enum class HandcraftedModel { kBrisque, kGmlog };

HandcraftedModel parse_handcrafted_model(std::string_view name);
std::string_view to_string(HandcraftedModel model) noexcept;
const std::vector<std::string>& feature_names(HandcraftedModel model);
std::vector<double> extract_frame(HandcraftedModel model, const LumaImage& image);

/// Per-frame features for a frame sequence; frames are processed on up to
/// `jobs` threads and assembled in input order.
FrameFeatureMatrix extract_video(HandcraftedModel model, const std::vector<LumaImage>& frames,
                                 std::string video_id, unsigned jobs = 1);

}  // namespace vra
