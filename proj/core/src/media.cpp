#include "vra/media.hpp"

#include <algorithm>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/videoio.hpp>

#include "vra/error.hpp"

namespace vra {

namespace fs = std::filesystem;

LumaImage::LumaImage(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), px_(std::move(pixels)) {
  if (width < 0 || height < 0 || px_.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("LumaImage: pixel count does not match dimensions");
}

LumaImage luma_from_bgr(std::span<const unsigned char> bgr, int width, int height) {
  if (bgr.size() != static_cast<std::size_t>(width) * height * 3)
    throw ValidationError("luma_from_bgr: buffer size does not match dimensions");
  LumaImage out(width, height);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double b = bgr[3 * i];
    const double g = bgr[3 * i + 1];
    const double r = bgr[3 * i + 2];
    px[i] = 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return out;
}

LumaImage mirror_horizontal(const LumaImage& image) {
  LumaImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) out.at(x, y) = image.at(image.width() - 1 - x, y);
  return out;
}

LumaImage to_luma(const cv::Mat& frame) {
  if (frame.empty()) throw MediaError("to_luma: empty frame");
  if (frame.depth() != CV_8U) throw MediaError("to_luma: expected an 8-bit frame");
  cv::Mat m = frame.isContinuous() ? frame : frame.clone();
  if (m.channels() == 3) {
    return luma_from_bgr({m.ptr<unsigned char>(), m.total() * 3}, m.cols, m.rows);
  }
  if (m.channels() == 1) {
    std::vector<double> px(m.ptr<unsigned char>(), m.ptr<unsigned char>() + m.total());
    return LumaImage(m.cols, m.rows, std::move(px));
  }
  throw MediaError("to_luma: unsupported channel count " + std::to_string(m.channels()));
}

namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::vector<cv::Mat> read_frames(const fs::path& source, int stride) {
  if (stride < 1) throw ValidationError("frame stride must be >= 1");
  if (!fs::exists(source)) throw IoError("media source '" + source.string() + "' does not exist");
  std::vector<cv::Mat> frames;

  if (fs::is_directory(source)) {
    const auto files = list_images(source);
    for (std::size_t i = 0; i < files.size(); i += static_cast<std::size_t>(stride)) {
      cv::Mat img = cv::imread(files[i].string(), cv::IMREAD_COLOR);
      if (img.empty())
        throw MediaError("failed to decode frame " + std::to_string(i) + " (" + files[i].string() + ")");
      frames.push_back(std::move(img));
    }
    if (frames.empty()) throw MediaError("no frames in '" + source.string() + "'");
    return frames;
  }

  cv::VideoCapture cap(source.string());
  if (!cap.isOpened()) throw MediaError("cannot open video '" + source.string() + "'");
  const auto expected = static_cast<long>(cap.get(cv::CAP_PROP_FRAME_COUNT));
  long index = 0;
  cv::Mat frame;
  while (cap.read(frame)) {
    if (index % stride == 0) frames.push_back(frame.clone());
    ++index;
  }
  if (index == 0) throw MediaError("failed to decode frame 0 of '" + source.string() + "'");
  if (expected > 0 && index < expected - 1) {
    throw MediaError("failed to decode frame " + std::to_string(index) + " of '" + source.string() +
                     "' (container reports " + std::to_string(expected) + ")");
  }
  return frames;
}

void write_frames(const std::vector<cv::Mat>& frames, const fs::path& target, FrameFormat format,
                  double fps) {
  if (frames.empty()) throw MediaError("no frames to write");
  if (format == FrameFormat::kPngDirectory) {
    fs::create_directories(target);
    char name[32];
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::snprintf(name, sizeof name, "frame_%06zu.png", i);
      if (!cv::imwrite((target / name).string(), frames[i]))
        throw MediaError("failed to encode frame " + std::to_string(i));
    }
    return;
  }
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const cv::Size size = frames.front().size();
  cv::VideoWriter writer(target.string(), cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps, size,
                         frames.front().channels() == 3);
  if (!writer.isOpened()) throw MediaError("cannot open video writer for '" + target.string() + "'");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].size() != size) throw MediaError("frame " + std::to_string(i) + " changes size");
    writer.write(frames[i]);
  }
}

cv::Size probe_frame_size(const fs::path& source) {
  if (fs::is_directory(source)) {
    const auto files = list_images(source);
    if (files.empty()) throw MediaError("no frames in '" + source.string() + "'");
    cv::Mat img = cv::imread(files.front().string(), cv::IMREAD_UNCHANGED);
    if (img.empty()) throw MediaError("failed to decode frame 0 (" + files.front().string() + ")");
    return img.size();
  }
  cv::VideoCapture cap(source.string());
  cv::Mat frame;
  if (!cap.isOpened() || !cap.read(frame)) throw MediaError("failed to decode frame 0 of '" + source.string() + "'");
  return frame.size();
}

}  // namespace vra
