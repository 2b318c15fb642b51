#pragma once

#include <filesystem>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "vra/image.hpp"

namespace vra {

enum class FrameFormat { kPngDirectory, kVideo };

/// Decodes frames from a video container or from a directory of images
/// (sorted by filename). Keeps every `stride`-th frame starting at 0.
/// Throws MediaError naming the frame index when decoding fails.
std::vector<cv::Mat> read_frames(const std::filesystem::path& source, int stride = 1);

/// Writes frames as `frame_000000.png`, ... into a directory, or as an MJPG
/// AVI container.
void write_frames(const std::vector<cv::Mat>& frames, const std::filesystem::path& target,
                  FrameFormat format, double fps = 25.0);

/// Frame size (width, height) of the first decodable frame.
cv::Size probe_frame_size(const std::filesystem::path& source);

/// BGR (or grayscale) 8-bit frame to BT.601 luminance.
LumaImage to_luma(const cv::Mat& frame);

}  // namespace vra
