#include "vra/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>

#include "vra/error.hpp"

namespace vra {

BoundingBox union_boxes(std::span<const BoundingBox> boxes) {
  if (boxes.empty()) throw ValidationError("union_boxes: no boxes");
  int x0 = boxes.front().x;
  int y0 = boxes.front().y;
  int x1 = boxes.front().right();
  int y1 = boxes.front().bottom();
  int frame = boxes.front().frame_index;
  for (const auto& b : boxes.subspan(1)) {
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.right());
    y1 = std::max(y1, b.bottom());
    frame = std::min(frame, b.frame_index);
  }
  return {frame, x0, y0, x1 - x0, y1 - y0};
}

BoundingBox enlarge_box(const BoundingBox& box, double factor, int frame_w, int frame_h) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw ValidationError("enlarge_box: factor must be positive");
  if (frame_w <= 0 || frame_h <= 0) throw ValidationError("enlarge_box: frame size must be positive");
  if (box.w <= 0 || box.h <= 0) throw ValidationError("enlarge_box: box extent must be positive");

  const double cx = box.x + 0.5 * box.w;
  const double cy = box.y + 0.5 * box.h;
  const double half_w = 0.5 * box.w * factor;
  const double half_h = 0.5 * box.h * factor;
  const auto x0 = std::clamp(std::lround(cx - half_w), 0L, static_cast<long>(frame_w));
  const auto x1 = std::clamp(std::lround(cx + half_w), 0L, static_cast<long>(frame_w));
  const auto y0 = std::clamp(std::lround(cy - half_h), 0L, static_cast<long>(frame_h));
  const auto y1 = std::clamp(std::lround(cy + half_h), 0L, static_cast<long>(frame_h));
  if (x1 <= x0 || y1 <= y0) throw ValidationError("enlarge_box: box lies outside the frame");
  return {box.frame_index, static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
          static_cast<int>(y1 - y0)};
}

CropRegion build_crop_region(const BoxTrack& track, double factor, int frame_w, int frame_h,
                             CropOrder order) {
  if (track.boxes.empty())
    throw ValidationError("no boxes for video '" + track.video_id + "'");
  BoundingBox region;
  if (order == CropOrder::kEnlargeThenUnion) {
    std::vector<BoundingBox> enlarged;
    enlarged.reserve(track.boxes.size());
    for (const auto& b : track.boxes) enlarged.push_back(enlarge_box(b, factor, frame_w, frame_h));
    region = union_boxes(enlarged);
  } else {
    region = enlarge_box(union_boxes(track.boxes), factor, frame_w, frame_h);
  }
  return {region.x, region.y, region.w, region.h, track.video_id};
}

std::vector<cv::Mat> crop_frames(const std::vector<cv::Mat>& frames, const CropRegion& region) {
  if (region.w <= 0 || region.h <= 0) throw ValidationError("crop region has a non-positive extent");
  std::vector<cv::Mat> out;
  out.reserve(frames.size());
  const cv::Rect roi(region.x, region.y, region.w, region.h);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const cv::Mat& f = frames[i];
    if (region.x < 0 || region.y < 0 || region.x + region.w > f.cols || region.y + region.h > f.rows) {
      throw ValidationError("crop region exceeds frame " + std::to_string(i) + " (" +
                            std::to_string(f.cols) + "x" + std::to_string(f.rows) + ")");
    }
    out.push_back(f(roi).clone());
  }
  return out;
}

}  // namespace vra
