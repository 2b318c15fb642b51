#include "vra/handcrafted.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vra/error.hpp"
#include "vra/parallel.hpp"

namespace vra {

namespace {

// Normalized (2r+1)^2 Gaussian weights, row-major.
std::vector<double> gaussian_window(int radius, double sigma) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
  double sum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      w.push_back(v);
      sum += v;
    }
  for (double& v : w) v /= sum;
  return w;
}

// Applies a zero-sum (or, with the center term, any) kernel in deviation
// form: sum_k w_k (I(p+k) - I(p)). For zero-sum kernels this equals the
// plain correlation and is exactly zero on constant regions.
double deviation_response(const LumaImage& img, int x, int y, int radius, const std::vector<double>& k) {
  const double center = img.at(x, y);
  double acc = 0.0;
  std::size_t i = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) acc += k[i++] * (img.clamped(x + dx, y + dy) - center);
  return acc;
}

struct ShapeTable {
  std::vector<double> shapes;
  std::vector<double> ratios;  // increasing in shape
};

const ShapeTable& shape_table() {
  static const ShapeTable table = [] {
    ShapeTable t;
    const auto steps = static_cast<std::size_t>(std::llround((kShapeGridMax - kShapeGridMin) / kShapeGridStep));
    t.shapes.reserve(steps + 1);
    t.ratios.reserve(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
      const double a = kShapeGridMin + static_cast<double>(i) * kShapeGridStep;
      t.shapes.push_back(a);
      t.ratios.push_back(ggd_moment_ratio(a));
    }
    return t;
  }();
  return table;
}

double lookup_shape(double ratio) {
  const auto& t = shape_table();
  const auto it = std::lower_bound(t.ratios.begin(), t.ratios.end(), ratio);
  if (it == t.ratios.begin()) return t.shapes.front();
  if (it == t.ratios.end()) return t.shapes.back();
  const auto hi = static_cast<std::size_t>(it - t.ratios.begin());
  const std::size_t lo = hi - 1;
  return (ratio - t.ratios[lo] <= t.ratios[hi] - ratio) ? t.shapes[lo] : t.shapes[hi];
}

void require_fit_samples(std::span<const double> samples) {
  if (samples.size() < kMinFitSamples)
    throw ValidationError("distribution fit needs at least " + std::to_string(kMinFitSamples) +
                          " samples, got " + std::to_string(samples.size()));
}

bool all_identical(std::span<const double> samples) {
  return std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples.front(); });
}

// Fits used inside the extractors. A degenerate sample set (constant map)
// maps to the upper end of the shape grid with zero spread, so every 8-bit
// frame yields finite features.
GgdFit fit_ggd_tolerant(std::span<const double> samples) {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (double v : samples) {
    abs_sum += std::abs(v);
    sq_sum += v * v;
  }
  const double n = static_cast<double>(samples.size());
  if (sq_sum == 0.0) return {kShapeGridMax, 0.0};
  const double mean_abs = abs_sum / n;
  const double mean_sq = sq_sum / n;
  return {lookup_shape(mean_abs * mean_abs / mean_sq), mean_sq};
}

AggdFit fit_aggd_tolerant(std::span<const double> samples) {
  std::size_t neg = 0;
  std::size_t pos = 0;
  double neg_sq = 0.0;
  double pos_sq = 0.0;
  double abs_sum = 0.0;
  for (double v : samples) {
    if (v < 0) {
      ++neg;
      neg_sq += v * v;
      abs_sum -= v;
    } else if (v > 0) {
      ++pos;
      pos_sq += v * v;
      abs_sum += v;
    }
  }
  if (neg == 0 && pos == 0) return {kShapeGridMax, 0.0, 0.0, 0.0};
  const double n = static_cast<double>(samples.size());
  const double sigma_l = neg ? std::sqrt(neg_sq / static_cast<double>(neg)) : 0.0;
  const double sigma_r = pos ? std::sqrt(pos_sq / static_cast<double>(pos)) : 0.0;
  const double r_hat = (abs_sum / n) * (abs_sum / n) / ((neg_sq + pos_sq) / n);
  double r_norm = r_hat;
  // The asymmetry correction tends to 1 as either side vanishes.
  if (neg && pos) {
    const double g = sigma_l / sigma_r;
    r_norm = r_hat * (g * g * g + 1.0) * (g + 1.0) / ((g * g + 1.0) * (g * g + 1.0));
  }
  const double shape = lookup_shape(r_norm);
  const double mean = (sigma_r - sigma_l) * std::tgamma(2.0 / shape) /
                      std::sqrt(std::tgamma(1.0 / shape) * std::tgamma(3.0 / shape));
  return {shape, mean, sigma_l, sigma_r};
}

}  // namespace

double ggd_moment_ratio(double shape) {
  return std::exp(2.0 * std::lgamma(2.0 / shape) - std::lgamma(1.0 / shape) - std::lgamma(3.0 / shape));
}

LumaImage mscn(const LumaImage& image) {
  if (image.width() < kMscnMinSide || image.height() < kMscnMinSide) {
    throw ValidationError("mscn: image " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " is smaller than 16x16");
  }
  static const std::vector<double> window = gaussian_window(kMscnRadius, kMscnSigma);
  LumaImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      // Local moments of the deviations d = I(q) - I(p): mu - I(p) = E[d]
      // and var = E[d^2] - E[d]^2.
      const double center = image.at(x, y);
      double m1 = 0.0;
      double m2 = 0.0;
      std::size_t i = 0;
      for (int dy = -kMscnRadius; dy <= kMscnRadius; ++dy)
        for (int dx = -kMscnRadius; dx <= kMscnRadius; ++dx) {
          const double d = image.clamped(x + dx, y + dy) - center;
          m1 += window[i] * d;
          m2 += window[i] * d * d;
          ++i;
        }
      const double var = std::max(m2 - m1 * m1, 0.0);
      out.at(x, y) = (0.0 - m1) / (std::sqrt(var) + kMscnStabilizer);
    }
  }
  return out;
}

GgdFit fit_ggd(std::span<const double> samples) {
  require_fit_samples(samples);
  if (all_identical(samples)) throw DegenerateError("fit_ggd: all samples are identical");
  return fit_ggd_tolerant(samples);
}

AggdFit fit_aggd(std::span<const double> samples) {
  require_fit_samples(samples);
  if (all_identical(samples)) throw DegenerateError("fit_aggd: all samples are identical");
  return fit_aggd_tolerant(samples);
}

LumaImage downsample_box2(const LumaImage& image) {
  LumaImage out(image.width() / 2, image.height() / 2);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      out.at(x, y) = 0.25 * (image.at(2 * x, 2 * y) + image.at(2 * x + 1, 2 * y) +
                             image.at(2 * x, 2 * y + 1) + image.at(2 * x + 1, 2 * y + 1));
    }
  return out;
}

namespace {

// (dx, dy) neighbour offsets in H, V, D1, D2 order.
constexpr std::array<std::array<int, 2>, 4> kPairOffsets = {{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};

void append_brisque_scale(const LumaImage& image, std::vector<double>& out) {
  const LumaImage coeffs = mscn(image);
  const GgdFit ggd = fit_ggd_tolerant(coeffs.pixels());
  out.push_back(ggd.shape);
  out.push_back(ggd.variance);

  std::vector<double> products;
  for (const auto& [ox, oy] : kPairOffsets) {
    products.clear();
    const int x_begin = std::max(0, -ox);
    const int x_end = coeffs.width() - std::max(0, ox);
    for (int y = 0; y + oy < coeffs.height(); ++y)
      for (int x = x_begin; x < x_end; ++x) products.push_back(coeffs.at(x, y) * coeffs.at(x + ox, y + oy));
    const AggdFit fit = fit_aggd_tolerant(products);
    out.push_back(fit.shape);
    out.push_back(fit.mean);
    out.push_back(fit.sigma_left * fit.sigma_left);
    out.push_back(fit.sigma_right * fit.sigma_right);
  }
}

}  // namespace

std::vector<double> brisque_frame(const LumaImage& image) {
  if (image.width() < kBrisqueMinSide || image.height() < kBrisqueMinSide) {
    throw ValidationError("brisque: image " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " is smaller than 32x32");
  }
  std::vector<double> features;
  features.reserve(kBrisqueFrameDims);
  append_brisque_scale(image, features);
  append_brisque_scale(downsample_box2(image), features);
  return features;
}

const std::vector<std::string>& brisque_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const char* scale : {"s1", "s2"}) {
      const std::string base = std::string("brisque.") + scale;
      n.push_back(base + ".ggd.shape");
      n.push_back(base + ".ggd.var");
      for (const char* orient : {"h", "v", "d1", "d2"}) {
        const std::string p = base + "." + orient;
        n.push_back(p + ".shape");
        n.push_back(p + ".mean");
        n.push_back(p + ".lvar");
        n.push_back(p + ".rvar");
      }
    }
    return n;
  }();
  return names;
}

// ---------------------------------------------------------------- GM-LOG

std::vector<double> gmlog_frame(const LumaImage& image, const GmlogConfig& config) {
  if (image.width() < kGmlogMinSide || image.height() < kGmlogMinSide) {
    throw ValidationError("gmlog: image " + std::to_string(image.width()) + "x" +
                          std::to_string(image.height()) + " is smaller than 16x16");
  }
  if (config.levels < 2) throw ValidationError("gmlog: need at least 2 quantization levels");

  const double s = config.filter_sigma;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * s)));
  const auto g = gaussian_window(radius, s);
  std::vector<double> kx;
  std::vector<double> ky;
  std::vector<double> klog;
  double log_mean = 0.0;
  {
    std::size_t i = 0;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx, ++i) {
        kx.push_back(-dx / (s * s) * g[i]);
        ky.push_back(-dy / (s * s) * g[i]);
        klog.push_back((dx * dx + dy * dy - 2.0 * s * s) / (s * s * s * s) * g[i]);
        log_mean += klog.back();
      }
    log_mean /= static_cast<double>(klog.size());
    for (double& v : klog) v -= log_mean;
  }

  const int w = image.width();
  const int h = image.height();
  LumaImage gm(w, h);
  LumaImage lg(w, h);
  LumaImage energy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = deviation_response(image, x, y, radius, kx);
      const double gy = deviation_response(image, x, y, radius, ky);
      const double l = deviation_response(image, x, y, radius, klog);
      gm.at(x, y) = std::sqrt(gx * gx + gy * gy);
      lg.at(x, y) = l;
      energy.at(x, y) = gm.at(x, y) * gm.at(x, y) + l * l;
    }

  // Joint adaptive normalization.
  const int nr = std::max(1, static_cast<int>(std::ceil(3.0 * config.norm_sigma)));
  const auto nw = gaussian_window(nr, config.norm_sigma);
  const auto levels = static_cast<std::size_t>(config.levels);
  std::vector<double> joint(levels * levels, 0.0);
  auto quantize = [&](double v, double range) {
    const auto q = static_cast<long>(std::floor(v / range * static_cast<double>(levels)));
    return static_cast<std::size_t>(std::clamp<long>(q, 0, static_cast<long>(levels) - 1));
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      std::size_t i = 0;
      for (int dy = -nr; dy <= nr; ++dy)
        for (int dx = -nr; dx <= nr; ++dx) acc += nw[i++] * energy.clamped(x + dx, y + dy);
      const double norm = std::sqrt(acc) + config.stabilizer;
      const auto qg = quantize(gm.at(x, y) / norm, config.gm_range);
      const auto ql = quantize(std::abs(lg.at(x, y)) / norm, config.log_range);
      joint[qg * levels + ql] += 1.0;
    }
  const double total = static_cast<double>(w) * h;
  for (double& v : joint) v /= total;

  std::vector<double> pg(levels, 0.0);
  std::vector<double> pl(levels, 0.0);
  for (std::size_t i = 0; i < levels; ++i)
    for (std::size_t j = 0; j < levels; ++j) {
      pg[i] += joint[i * levels + j];
      pl[j] += joint[i * levels + j];
    }
  // Averaged conditionals over the conditioning bins that carry mass.
  std::vector<double> qg(levels, 0.0);
  std::vector<double> ql(levels, 0.0);
  std::size_t lcount = 0;
  std::size_t gcount = 0;
  for (std::size_t j = 0; j < levels; ++j) {
    if (pl[j] <= 0.0) continue;
    ++lcount;
    for (std::size_t i = 0; i < levels; ++i) qg[i] += joint[i * levels + j] / pl[j];
  }
  for (std::size_t i = 0; i < levels; ++i) {
    if (pg[i] <= 0.0) continue;
    ++gcount;
    for (std::size_t j = 0; j < levels; ++j) ql[j] += joint[i * levels + j] / pg[i];
  }
  for (double& v : qg) v /= static_cast<double>(lcount);
  for (double& v : ql) v /= static_cast<double>(gcount);

  std::vector<double> features;
  features.reserve(4 * levels);
  features.insert(features.end(), pg.begin(), pg.end());
  features.insert(features.end(), pl.begin(), pl.end());
  features.insert(features.end(), qg.begin(), qg.end());
  features.insert(features.end(), ql.begin(), ql.end());
  return features;
}

const std::vector<std::string>& gmlog_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const char* block : {"gm.marginal", "log.marginal", "gm.conditional", "log.conditional"})
      for (int i = 0; i < 10; ++i) n.push_back(std::string("gmlog.") + block + "." + std::to_string(i));
    return n;
  }();
  return names;
}

// ---------------------------------------------------------------- dispatch

HandcraftedModel parse_handcrafted_model(std::string_view name) {
  if (name == "brisque") return HandcraftedModel::kBrisque;
  if (name == "gmlog" || name == "gm-log") return HandcraftedModel::kGmlog;
  throw ConfigError("unknown handcrafted model '" + std::string(name) + "' (expected brisque or gmlog)");
}

std::string_view to_string(HandcraftedModel model) noexcept {
  return model == HandcraftedModel::kBrisque ? "brisque" : "gmlog";
}

const std::vector<std::string>& feature_names(HandcraftedModel model) {
  return model == HandcraftedModel::kBrisque ? brisque_feature_names() : gmlog_feature_names();
}

std::vector<double> extract_frame(HandcraftedModel model, const LumaImage& image) {
  return model == HandcraftedModel::kBrisque ? brisque_frame(image) : gmlog_frame(image);
}

FrameFeatureMatrix extract_video(HandcraftedModel model, const std::vector<LumaImage>& frames,
                                 std::string video_id, unsigned jobs) {
  if (frames.empty()) throw ValidationError("extract: video '" + video_id + "' has no frames");
  std::vector<std::vector<double>> rows(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) { rows[i] = extract_frame(model, frames[i]); });
  return FrameFeatureMatrix(std::move(video_id), feature_names(model), std::move(rows));
}

}  // namespace vra
