#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "vra/error.hpp"
#include "vra/evaluation.hpp"
#include "vra/fusion.hpp"
#include "vra/media.hpp"
#include "vra/parallel.hpp"
#include "vra/random.hpp"
#include "vra/serialize.hpp"
#include "vra/synth.hpp"

namespace fs = std::filesystem;
using namespace vra;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vra_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SvrModel small_model(Kernel k) {
  SplitMix64 r(3);
  Eigen::MatrixXd X(25, 3);
  Eigen::VectorXd y(25);
  for (Eigen::Index i = 0; i < 25; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = r.normal(0, 1.0 / 3.0);
    y(i) = 3 + X(i, 0) + 0.1 * r.normal();
  }
  return train_svr(X, y, {k, 10.0, 0.1}, {"a", "b", "c"});
}

}  // namespace

TEST(ModelJson, RoundTripPredictsIdentically) {
  for (const auto& k : {Kernel::linear(), Kernel::rbf(0.37)}) {
    const SvrModel m = small_model(k);
    const SvrModel back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.kernel, m.kernel);
    EXPECT_EQ(back.feature_names, m.feature_names);
    EXPECT_EQ(back.support_indices, m.support_indices);
    EXPECT_EQ(back.dual_coeffs, m.dual_coeffs);
    EXPECT_EQ(back.bias, m.bias);
    const Eigen::MatrixXd probe = Eigen::MatrixXd::Random(7, 3);
    EXPECT_EQ(predict(back, probe), predict(m, probe));
    EXPECT_EQ(model_to_json(back), model_to_json(m));
  }
}

TEST(ModelJson, FileRoundTripAndErrors) {
  const auto dir = temp_dir("model");
  const SvrModel m = small_model(Kernel::rbf(0.1));
  save_model(m, dir / "m.json");
  EXPECT_EQ(predict(load_model(dir / "m.json"), Eigen::MatrixXd::Ones(1, 3)), predict(m, Eigen::MatrixXd::Ones(1, 3)));
  EXPECT_THROW(model_from_json("{"), ParseError);
  auto j = nlohmann::json::parse(model_to_json(m));
  j["feature_names"].push_back("extra");
  EXPECT_ANY_THROW(model_from_json(j.dump()));
  j = nlohmann::json::parse(model_to_json(m));
  j["format"] = "other";
  EXPECT_THROW(model_from_json(j.dump()), ParseError);
  EXPECT_ANY_THROW(load_model(dir / "missing.json"));
}

TEST(SelectionJson, RoundTrip) {
  SelectionResult s;
  s.k = 3;
  s.selected_indices = {1, 4, 7};
  s.selected_names = {"b", "e", "h"};
  s.frequency = {0, 100, 3, 0, 99, 1, 0, 97, 0};
  s.stage1_scores = {{3, 0.8123456789012345, 10}, {9, 0.7, 9}};
  s.stage2_iterations = 100;
  s.skipped_iterations = 1;
  EXPECT_EQ(selection_from_json(selection_to_json(s)), s);
  const auto dir = temp_dir("selection");
  save_selection(s, dir / "s.json");
  EXPECT_EQ(load_selection(dir / "s.json"), s);
}

TEST(ReportJson, StructureAndTimestampIsolation) {
  const auto data = make_synthetic({});
  std::vector<VideoFeatureVector> vectors;
  for (const auto& f : data.frames) vectors.push_back(fuse_mean_std(f));
  const auto c3 = select_subset(data.records, Subset::C3);
  const Dataset ds = consolidate(restrict_to(vectors, c3), c3);
  BenchmarkConfig cfg;
  cfg.iterations = 3;
  cfg.search_hyperparameters = false;
  cfg.keep_predictions = true;
  auto rep = run_benchmark(ds, Protocol::kFacialId, cfg, "synth");
  const auto j = nlohmann::json::parse(report_to_json(rep));
  EXPECT_EQ(j["protocol"], "facial-id");
  EXPECT_EQ(j["feature_model"], "synth");
  EXPECT_EQ(j["iterations"].size(), 3u);
  EXPECT_EQ(j["iterations"][0]["held_out"].size(), 4u);
  for (const char* m : {"srcc", "plcc", "rmse"}) {
    EXPECT_TRUE(j["aggregate"][m].contains("mean"));
    EXPECT_TRUE(j["aggregate"][m].contains("std"));
  }
  EXPECT_EQ(j["skipped"], 0);
  EXPECT_FALSE(j.contains("metadata"));
  rep.timestamp = utc_timestamp();
  auto stamped = nlohmann::json::parse(report_to_json(rep));
  EXPECT_EQ(stamped["metadata"]["timestamp"].get<std::string>().size(), 20u);
  stamped.erase("metadata");
  EXPECT_EQ(stamped, j);

  const std::string preds = report_predictions_csv(rep);
  EXPECT_EQ(std::count(preds.begin(), preds.end(), '\n'), 1 + 3 * 128);
  const std::string metrics = report_metrics_csv(rep);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 1 + 3 * 2);
}

TEST(Synth, DeterministicAndShaped) {
  const auto a = make_synthetic({});
  const auto b = make_synthetic({});
  EXPECT_EQ(a.records, b.records);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) EXPECT_EQ(a.frames[i], b.frames[i]);
  EXPECT_EQ(a.records.size(), (16u + 6u + 13u) * 20u * 2u);
  EXPECT_EQ(select_subset(a.records, Subset::C3).size(), 640u);
  EXPECT_EQ(a.frames[0].width(), 16u);
  EXPECT_EQ(a.boxes.size(), 20u);
  SynthConfig other;
  other.seed = 8;
  EXPECT_NE(make_synthetic(other).records, a.records);
}

TEST(Synth, WrittenFilesAreByteIdentical) {
  SynthConfig small;
  small.facial_pairs = 4;
  small.submissions_c1 = 2;
  small.submissions_c2 = 2;
  small.submissions_c3 = 3;
  const auto d1 = temp_dir("synth1");
  const auto d2 = temp_dir("synth2");
  write_synthetic(make_synthetic(small), d1);
  write_synthetic(make_synthetic(small), d2);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(d1)) {
    if (!e.is_regular_file()) continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(d2 / fs::relative(e.path(), d1))) << e.path();
  }
  EXPECT_GT(files, 3u);
  const auto manifest = load_manifest(d1 / "manifest.csv");
  EXPECT_EQ(manifest.size(), (3u + 2u + 2u) * 4u * 2u);
  EXPECT_EQ(load_features(d1 / "frames" / (manifest[0].video_id + ".csv")).width(), 16u);
}

TEST(Synth, RegressionProblem) {
  const auto p = make_regression_problem(50, 20, 4, 0.1, 9);
  EXPECT_EQ(p.X.rows(), 50);
  EXPECT_EQ(p.X.cols(), 20);
  EXPECT_EQ(p.informative.size(), 4u);
  EXPECT_TRUE(std::is_sorted(p.informative.begin(), p.informative.end()));
  const auto q = make_regression_problem(50, 20, 4, 0.1, 9);
  EXPECT_EQ(p.X, q.X);
  EXPECT_EQ(p.y, q.y);
}

TEST(Media, PngDirectoryRoundTripIsLossless) {
  const auto data = make_synthetic({});
  const auto frames = render_target_frames(data.boxes[0], 1920, 1080, 96, 54, 1);
  ASSERT_FALSE(frames.empty());
  const auto dir = temp_dir("png");
  write_frames(frames, dir / "clip", FrameFormat::kPngDirectory);
  const auto back = read_frames(dir / "clip");
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_EQ(cv::norm(back[i], frames[i], cv::NORM_INF), 0.0);
  EXPECT_EQ(read_frames(dir / "clip", 2).size(), (frames.size() + 1) / 2);
  EXPECT_EQ(probe_frame_size(dir / "clip"), cv::Size(96, 54));
  EXPECT_THROW(read_frames(dir / "absent"), IoError);
}

TEST(Media, VideoContainerRoundTripKeepsFrameCount) {
  const auto data = make_synthetic({});
  const auto frames = render_target_frames(data.boxes[1], 1920, 1080, 128, 72, 2);
  const auto dir = temp_dir("avi");
  write_frames(frames, dir / "clip.avi", FrameFormat::kVideo);
  const auto back = read_frames(dir / "clip.avi");
  ASSERT_EQ(back.size(), frames.size());
  EXPECT_EQ(back[0].cols, 128);
  EXPECT_LT(cv::norm(back[0], frames[0], cv::NORM_L1) / (128.0 * 72 * 3), 10.0);
}

TEST(Media, LumaConversion) {
  cv::Mat bgr(2, 2, CV_8UC3, cv::Scalar(10, 20, 30));
  const auto l = to_luma(bgr);
  EXPECT_NEAR(l.at(1, 1), 0.299 * 30 + 0.587 * 20 + 0.114 * 10, 1e-12);
  cv::Mat gray(2, 3, CV_8UC1, cv::Scalar(77));
  EXPECT_EQ(to_luma(gray).at(2, 1), 77.0);
}

TEST(Parallel, EveryIndexOnceAndLowestErrorWins) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  try {
    parallel_for(100, 4, [](std::size_t i) {
      if (i == 17 || i == 63) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
  EXPECT_GE(resolve_jobs(0), 1u);
  EXPECT_EQ(resolve_jobs(3), 3u);
}
