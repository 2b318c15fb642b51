#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vra {

/// Grayscale luminance map, row-major, values on the [0, 255] scale.
class LumaImage {
 public:
  LumaImage() = default;
  LumaImage(int width, int height, double fill = 0.0)
      : width_(width), height_(height), px_(static_cast<std::size_t>(width) * height, fill) {}
  LumaImage(int width, int height, std::vector<double> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return px_.size(); }
  bool empty() const noexcept { return px_.empty(); }

  double& at(int x, int y) noexcept { return px_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const noexcept { return px_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Replicated-border access.
  double clamped(int x, int y) const noexcept {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return at(x, y);
  }

  std::span<const double> pixels() const noexcept { return px_; }
  std::span<double> pixels() noexcept { return px_; }

  bool operator==(const LumaImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> px_;
};

/// BT.601 luma from 8-bit interleaved BGR.
LumaImage luma_from_bgr(std::span<const unsigned char> bgr, int width, int height);

/// Left-right mirror.
LumaImage mirror_horizontal(const LumaImage& image);

}  // namespace vra
