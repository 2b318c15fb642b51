#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "vra/datamodel.hpp"
#include "vra/error.hpp"
#include "vra/random.hpp"

namespace fs = std::filesystem;
using namespace vra;

namespace {

constexpr const char* kHeader = "video_id,subset,facial_id_pair,submit_id,path,r1,r2,r3,r4,r5";

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vra_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Manifest, RatingStatistics) {
  const auto r = make_record("v", Subset::C3, "p", "s", "a.mp4", {3, 4, 4, 5, 4});
  EXPECT_DOUBLE_EQ(r.mos, 4.0);
  EXPECT_NEAR(r.mos_std, std::sqrt(0.5), 1e-15);
}

TEST(Manifest, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(parse_manifest(std::string(kHeader) + "\n").empty());
}

TEST(Manifest, ParsesRowsAndOptionalMos) {
  const std::string text = std::string(kHeader) + ",mos\nv1,C3,p1,s1,a.mp4,3,4,4,5,4,4.0\nv2,C1,p2,s2,b.mp4,1,1,1,1,2,1.2\n";
  const auto records = parse_manifest(text);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].video_id, "v1");
  EXPECT_EQ(records[1].subset, Subset::C1);
  EXPECT_DOUBLE_EQ(records[1].mos, 1.2);
}

TEST(Manifest, ErrorsNameTheLine) {
  const std::string base = std::string(kHeader) + "\nv1,C3,p1,s1,a.mp4,3,4,4,5,4\n";
  try {
    parse_manifest(base + "v2,C3,p1,s1,a.mp4,3,4,4,6,4\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_manifest(base + "v2,C9,p1,s1,a.mp4,3,4,4,5,4\n"), ParseError);
  EXPECT_THROW(parse_manifest(base + "v2,C3,p1,s1,a.mp4,3,4,4,5\n"), ParseError);
  EXPECT_THROW(parse_manifest(base + "v1,C3,p1,s1,a.mp4,3,4,4,5,4\n"), DuplicateError);
  EXPECT_THROW(parse_manifest("video_id,subset\n"), ParseError);
}

TEST(Manifest, PrecomputedMosIsValidated) {
  const std::string text = std::string(kHeader) + ",mos\nv1,C3,p1,s1,a.mp4,3,4,4,5,4,4.5\n";
  EXPECT_THROW(parse_manifest(text), ParseError);
}

TEST(Manifest, RoundTripIsIdentity) {
  SplitMix64 rng(3);
  std::vector<VideoRecord> records;
  for (int i = 0; i < 50; ++i) {
    std::vector<int> ratings(kRatersPerVideo);
    for (auto& r : ratings) r = 1 + static_cast<int>(rng.below(5));
    records.push_back(make_record("vid" + std::to_string(i), static_cast<Subset>(i % 3), "pair,with comma",
                                  "s" + std::to_string(i % 4), "media/" + std::to_string(i) + ".mp4", ratings));
  }
  const auto dir = temp_dir("manifest");
  write_manifest(records, dir / "m.csv");
  const auto loaded = load_manifest(dir / "m.csv");
  EXPECT_EQ(loaded, records);
  for (const auto& r : loaded) {
    EXPECT_LE(*std::min_element(r.ratings.begin(), r.ratings.end()), r.mos);
    EXPECT_GE(*std::max_element(r.ratings.begin(), r.ratings.end()), r.mos);
  }
}

TEST(Features, RoundTrip) {
  const FrameFeatureMatrix m("clip", {"a", "b"}, {{1.5, -2.25}});
  const auto dir = temp_dir("features");
  write_features(m, dir / "clip.csv");
  EXPECT_EQ(load_features(dir / "clip.csv"), m);
}

TEST(Features, RoundTripPreservesRandomValues) {
  SplitMix64 rng(11);
  std::vector<std::vector<double>> rows(7, std::vector<double>(13));
  for (auto& row : rows)
    for (auto& v : row) v = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
  std::vector<std::string> names;
  for (int j = 0; j < 13; ++j) names.push_back("f" + std::to_string(j));
  const FrameFeatureMatrix m("x", names, rows);
  const auto back = parse_features(format_features(m), "x");
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 13; ++j)
      EXPECT_LE(std::abs(back.rows()[i][j] - rows[i][j]), 1e-9 * std::abs(rows[i][j]));
}

TEST(Features, DimensionMismatchAndNonFiniteAreFormatErrors) {
  EXPECT_THROW(parse_features("a,b\n1,2,3\n", "x"), FormatError);
  EXPECT_THROW(parse_features("a,b\n1,nan\n", "x"), FormatError);
  EXPECT_THROW(parse_features("a,b\n1,inf\n", "x"), FormatError);
  EXPECT_THROW(parse_features("a,a\n1,2\n", "x"), FormatError);
}

TEST(Features, WideExportLoads) {
  std::vector<std::string> names;
  for (int j = 0; j < 2048; ++j) names.push_back("resnet." + std::to_string(j));
  const FrameFeatureMatrix m("wide", names, {std::vector<double>(2048, 0.5), std::vector<double>(2048, 0.25)});
  const auto back = parse_features(format_features(m), "wide");
  EXPECT_EQ(back.width(), 2048u);
}

TEST(Features, MatrixInvariants) {
  EXPECT_THROW(FrameFeatureMatrix("v", {"a", "b"}, {{1.0}}), ValidationError);
  EXPECT_THROW(FrameFeatureMatrix("v", {"a"}, {{std::nan("")}}), ValidationError);
  EXPECT_THROW(FrameFeatureMatrix("v", {"a", "a"}, {{1.0, 2.0}}), ValidationError);
}

TEST(VideoFeatures, ConsolidatedRoundTrip) {
  std::vector<VideoFeatureVector> v = {{"a", {"x.mean", "x.std"}, {1.0, 0.5}}, {"b", {"x.mean", "x.std"}, {2.0, 0.0}}};
  EXPECT_EQ(parse_video_features(format_video_features(v)), v);
  EXPECT_THROW(parse_video_features("id,x\na,1\n"), FormatError);
}

TEST(Boxes, SingleEntry) {
  const auto t = parse_boxes(R"({"video_id":"t","boxes":[{"frame":0,"x":10,"y":20,"w":100,"h":120}]})");
  ASSERT_EQ(t.boxes.size(), 1u);
  EXPECT_EQ(t.boxes[0], (BoundingBox{0, 10, 20, 100, 120}));
}

TEST(Boxes, EmptyListIsAnError) {
  try {
    parse_boxes(R"({"video_id":"t","boxes":[]})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no boxes for video"), std::string::npos);
  }
}

TEST(Boxes, SortedAndValidated) {
  const auto t = parse_boxes(
      R"({"video_id":"t","boxes":[{"frame":2,"x":0,"y":0,"w":1,"h":1},{"frame":0,"x":5,"y":5,"w":2,"h":2}]})");
  EXPECT_EQ(t.boxes[0].frame_index, 0);
  EXPECT_EQ(t.boxes[1].frame_index, 2);
  EXPECT_THROW(parse_boxes(R"({"video_id":"t","boxes":[{"frame":0,"x":0,"y":0,"w":-1,"h":1}]})"), ValidationError);
  EXPECT_THROW(parse_boxes(R"({"video_id":"t","boxes":[{"frame":0,"x":0,"y":0,"w":1}]})"), ParseError);
  EXPECT_THROW(parse_boxes(R"({"boxes":[]})"), ParseError);
}

TEST(Boxes, RoundTrip) {
  BoxTrack t{"tgt", {{0, 1, 2, 3, 4}, {1, 5, 6, 7, 8}}};
  const auto dir = temp_dir("boxes");
  write_boxes(t, dir / "b.json");
  const auto back = load_boxes(dir / "b.json");
  EXPECT_EQ(back.video_id, t.video_id);
  EXPECT_EQ(back.boxes, t.boxes);
}

TEST(FormatDouble, RoundTripsExactly) {
  SplitMix64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300, 300));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}
