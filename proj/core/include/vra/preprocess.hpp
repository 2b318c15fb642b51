#pragma once

#include <span>
#include <string>
#include <vector>

#include "vra/datamodel.hpp"

namespace cv {
class Mat;
}

namespace vra {

/// Crop rectangle shared by every face-swap video derived from one target.
struct CropRegion {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  std::string source_video_id;

  bool operator==(const CropRegion&) const = default;
};

/// Which of the two compositions build_crop_region uses.
enum class CropOrder {
  kEnlargeThenUnion,  ///< enlarge every per-frame box, then take their union (default)
  kUnionThenEnlarge,  ///< union the raw boxes, then enlarge once
};

constexpr double kDefaultEnlargeFactor = 1.3;

/// Smallest axis-aligned box containing every input box. The frame_index of
/// the result is the smallest input frame_index. Throws ValidationError on
/// an empty list.
BoundingBox union_boxes(std::span<const BoundingBox> boxes);

/// Scales `box` about its center by `factor`, rounds the edges to the nearest
/// pixel and intersects the result with [0, frame_w] x [0, frame_h].
/// Throws ValidationError when the factor or frame size is not positive or the
/// box lies entirely outside the frame.
BoundingBox enlarge_box(const BoundingBox& box, double factor, int frame_w, int frame_h);

CropRegion build_crop_region(const BoxTrack& track, double factor, int frame_w, int frame_h,
                             CropOrder order = CropOrder::kEnlargeThenUnion);

/// Crops every frame to `region`. Every output frame has size region.w x region.h
/// and the frame count is preserved. Throws ValidationError when the region
/// does not fit a frame.
std::vector<cv::Mat> crop_frames(const std::vector<cv::Mat>& frames, const CropRegion& region);

}  // namespace vra
