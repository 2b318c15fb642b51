// vra: command-line front-end for the realism-assessment pipeline.
//
// Every subcommand reads and writes the documented file formats only. On
// failure a single JSON object {"error", "message", "remediation"} is written
// to stderr and the process exits nonzero.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>
#include <toml.hpp>

#include "vra/datamodel.hpp"
#include "vra/error.hpp"
#include "vra/evaluation.hpp"
#include "vra/fusion.hpp"
#include "vra/handcrafted.hpp"
#include "vra/media.hpp"
#include "vra/metrics.hpp"
#include "vra/parallel.hpp"
#include "vra/preprocess.hpp"
#include "vra/random.hpp"
#include "vra/selection.hpp"
#include "vra/serialize.hpp"
#include "vra/svr.hpp"
#include "vra/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace vra;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

// ------------------------------------------------------------------ settings

struct Settings {
  // svr
  std::string kernel = "rbf";
  double C = 1.0;
  double gamma = 0.1;
  double epsilon = 0.1;
  double tolerance = 1e-3;
  SvrGrid grid;
  bool search = true;
  // selection
  SelectionConfig selection;
  bool select_features = true;
  // protocol
  std::string protocol = "facial-id";
  int iterations = kDefaultIterations;
  std::uint64_t seed_base = 0;
  unsigned jobs = 0;
  std::string predictor = "svr";
  std::string test_subset = "C2";
  std::string level = "video";
  // preprocessing
  double enlarge = kDefaultEnlargeFactor;
  std::string crop_order = "enlarge-then-union";
  int stride = 1;
  // synth
  SynthConfig synth;
  int media_width = 320;
  int media_height = 180;

  SvrParams svr_params() const {
    SvrParams p;
    if (kernel == "linear") {
      p.kernel = Kernel::linear();
    } else if (kernel == "rbf") {
      p.kernel = Kernel::rbf(gamma);
    } else {
      throw ConfigError("unknown kernel '" + kernel + "' (expected linear or rbf)");
    }
    p.C = C;
    p.epsilon = epsilon;
    p.tolerance = tolerance;
    return p;
  }
};

template <typename T>
void take(const toml::table& t, std::string_view key, T& out) {
  if (const auto v = t[key].value<T>()) out = *v;
}

std::vector<double> take_list(const toml::table& t, std::string_view key, std::vector<double> fallback) {
  const auto* arr = t[key].as_array();
  if (!arr) return fallback;
  std::vector<double> out;
  for (const auto& e : *arr) {
    const auto v = e.value<double>();
    if (!v) throw ConfigError("config: '" + std::string(key) + "' must be a list of numbers");
    out.push_back(*v);
  }
  return out;
}

void load_config(const fs::path& path, Settings& s) {
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
  if (const auto* t = root["svr"].as_table()) {
    take(*t, "kernel", s.kernel);
    take(*t, "C", s.C);
    take(*t, "gamma", s.gamma);
    take(*t, "epsilon", s.epsilon);
    take(*t, "tolerance", s.tolerance);
    take(*t, "grid_search", s.search);
  }
  if (const auto* t = root["grid"].as_table()) {
    s.grid.C = take_list(*t, "C", s.grid.C);
    s.grid.gamma = take_list(*t, "gamma", s.grid.gamma);
  }
  if (const auto* t = root["selection"].as_table()) {
    std::int64_t step = static_cast<std::int64_t>(s.selection.step);
    take(*t, "step", step);
    s.selection.step = static_cast<std::size_t>(step);
    take(*t, "stage1_iterations", s.selection.stage1_iterations);
    take(*t, "stage2_iterations", s.selection.stage2_iterations);
    take(*t, "test_fraction", s.selection.test_fraction);
    std::int64_t seed = static_cast<std::int64_t>(s.selection.seed_base);
    take(*t, "seed_base", seed);
    s.selection.seed_base = static_cast<std::uint64_t>(seed);
    take(*t, "enabled", s.select_features);
  }
  if (const auto* t = root["bench"].as_table()) {
    take(*t, "protocol", s.protocol);
    take(*t, "iterations", s.iterations);
    std::int64_t seed = static_cast<std::int64_t>(s.seed_base);
    take(*t, "seed_base", seed);
    s.seed_base = static_cast<std::uint64_t>(seed);
    std::int64_t jobs = s.jobs;
    take(*t, "jobs", jobs);
    s.jobs = static_cast<unsigned>(jobs);
    take(*t, "predictor", s.predictor);
    take(*t, "test_subset", s.test_subset);
    take(*t, "level", s.level);
  }
  if (const auto* t = root["crop"].as_table()) {
    take(*t, "enlarge", s.enlarge);
    take(*t, "order", s.crop_order);
  }
  if (const auto* t = root["extract"].as_table()) take(*t, "stride", s.stride);
  if (const auto* t = root["synth"].as_table()) {
    std::int64_t seed = static_cast<std::int64_t>(s.synth.seed);
    take(*t, "seed", seed);
    s.synth.seed = static_cast<std::uint64_t>(seed);
    take(*t, "media_width", s.media_width);
    take(*t, "media_height", s.media_height);
    auto size = [&](std::string_view key, std::size_t& out) {
      std::int64_t v = static_cast<std::int64_t>(out);
      take(*t, key, v);
      if (v < 1) throw ConfigError("config: synth." + std::string(key) + " must be positive");
      out = static_cast<std::size_t>(v);
    };
    size("facial_pairs", s.synth.facial_pairs);
    size("clips_per_submission", s.synth.clips_per_submission);
    size("submissions_c1", s.synth.submissions_c1);
    size("submissions_c2", s.synth.submissions_c2);
    size("submissions_c3", s.synth.submissions_c3);
    size("frames_per_video", s.synth.frames_per_video);
  }
}

// ------------------------------------------------------------------- helpers

Subset subset_arg(const std::string& text) {
  const auto s = parse_subset(text);
  if (!s) throw ConfigError("unknown subset '" + text + "' (expected C1, C2 or C3)");
  return *s;
}

CropOrder crop_order_arg(const std::string& text) {
  if (text == "enlarge-then-union") return CropOrder::kEnlargeThenUnion;
  if (text == "union-then-enlarge") return CropOrder::kUnionThenEnlarge;
  throw ConfigError("unknown crop order '" + text + "' (expected enlarge-then-union or union-then-enlarge)");
}

PredictorKind predictor_arg(const std::string& text) {
  if (text == "svr") return PredictorKind::kSvr;
  if (text == "random") return PredictorKind::kRandom;
  throw ConfigError("unknown predictor '" + text + "' (expected svr or random)");
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw ConfigError("missing required " + what);
  if (!fs::exists(p)) throw IoError(what + " '" + p.string() + "' does not exist");
}

fs::path media_path(const fs::path& manifest, const VideoRecord& r) {
  const fs::path p(r.path);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

void emit(const std::string& text, const fs::path& out) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(out, text);
  }
}

Dataset load_dataset(const fs::path& features, const fs::path& manifest, std::optional<Subset> subset) {
  require_file(features, "features file");
  require_file(manifest, "manifest");
  auto records = load_manifest(manifest);
  if (subset) records = select_subset(records, *subset);
  if (records.empty()) throw ValidationError("no manifest records for the requested subset");
  return consolidate(restrict_to(load_video_features(features), records), records);
}

// Crop region per facial-id pair, from boxes/<pair>.json and the frame size
// of the first video of that pair.
CropRegion region_for(const fs::path& boxes_dir, const VideoRecord& r, const cv::Size& frame,
                      const Settings& s) {
  const fs::path file = boxes_dir / (r.facial_id_pair + ".json");
  require_file(file, "box file");
  return build_crop_region(load_boxes(file), s.enlarge, frame.width, frame.height, crop_order_arg(s.crop_order));
}

FrameFeatureMatrix extract_from_frames(HandcraftedModel model, const std::vector<cv::Mat>& frames,
                                       const std::string& video_id) {
  std::vector<LumaImage> luma;
  luma.reserve(frames.size());
  for (const auto& f : frames) luma.push_back(to_luma(f));
  return extract_video(model, luma, video_id);
}

// Crops, extracts and fuses every record in memory.
std::vector<VideoFeatureVector> features_from_media(HandcraftedModel model, const fs::path& manifest,
                                                    const fs::path& boxes_dir,
                                                    const std::vector<VideoRecord>& records, const Settings& s) {
  if (boxes_dir.empty()) throw ConfigError("--boxes is required when features are computed from media");
  std::vector<VideoFeatureVector> out(records.size());
  parallel_for(records.size(), s.jobs, [&](std::size_t i) {
    const auto& r = records[i];
    const auto frames = read_frames(media_path(manifest, r), s.stride);
    const auto region = region_for(boxes_dir, r, frames.front().size(), s);
    out[i] = fuse_mean_std(extract_from_frames(model, crop_frames(frames, region), r.video_id));
  });
  return out;
}

json level_json(const LevelMetrics& m) {
  return {{"n", m.n},
          {"srcc", m.srcc},
          {"plcc", m.plcc},
          {"rmse", m.rmse},
          {"logistic", {{"beta1", m.logistic.beta1}, {"beta2", m.logistic.beta2}, {"beta3", m.logistic.beta3},
                        {"beta4", m.logistic.beta4}}},
          {"remap_fallback", m.remap_fallback}};
}

// -------------------------------------------------------------------- errors

struct Remedy {
  int exit_code;
  std::string hint;
};

Remedy remedy_for(const std::string& code) {
  static const std::map<std::string, Remedy> table = {
      {"config_error", {kExitUsage, "check the flags and config file; run `vra <command> --help`"}},
      {"io_error", {kExitInput, "check that the path exists and is readable"}},
      {"parse_error", {kExitInput, "fix the reported line or field in the input file"}},
      {"format_error", {kExitInput, "regenerate the file with the matching writer (`extract`, `fuse`)"}},
      {"schema_error", {kExitInput, "features must share one header; re-fuse the inputs with the same model"}},
      {"join_error", {kExitInput, "every manifest record needs a feature row and vice versa"}},
      {"duplicate_error", {kExitInput, "video ids must be unique in the manifest"}},
      {"media_error", {kExitInput, "re-encode the video or export frames as PNG"}},
  };
  const auto it = table.find(code);
  return it == table.end() ? Remedy{kExitRuntime, "inspect the message; inputs may be degenerate"} : it->second;
}

int report_error(const std::string& code, const std::string& message, const std::string& hint, int exit_code) {
  std::cerr << json{{"error", code}, {"message", message}, {"remediation", hint}}.dump() << '\n';
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Visual realism assessment toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Settings s;
  fs::path config_path;
  fs::path manifest, boxes, features, model_path, selection_path, out, input, frames_dir;
  std::string model_name, feature_model, subset_text = "C3", video_id;
  bool media = false;
  bool force = false;
  std::size_t fixed_k = 0;

  // Flags shared across commands bind to the same storage; config values
  // are applied first and explicitly given flags win.
  struct Overrides {
    std::string protocol, level, predictor, kernel, test_subset, crop_order;
    int iterations = 0;
    std::uint64_t seed_base = 0, seed = 0;
    unsigned jobs = 0;
    double C = 0, gamma = 0, epsilon = 0, enlarge = 0;
    int stride = 0;
  } o;
  std::vector<CLI::Option*> given;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "TOML config file");
    given.push_back(cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)"));
  };
  auto svr_flags = [&](CLI::App* cmd) {
    given.push_back(cmd->add_option("--kernel", o.kernel, "linear or rbf"));
    given.push_back(cmd->add_option("--C", o.C, "SVR box constraint (disables grid search)"));
    given.push_back(cmd->add_option("--gamma", o.gamma, "RBF width (disables grid search)"));
    given.push_back(cmd->add_option("--epsilon", o.epsilon, "epsilon tube on the MOS scale"));
  };

  auto* synth = app.add_subcommand("synth", "write the seeded synthetic dataset");
  common(synth);
  given.push_back(synth->add_option("--seed", o.seed, "generator seed"));
  synth->add_option("--out", out, "output directory")->required();
  synth->add_flag("--media", media, "also render videos for every record (box space = media size)");

  auto* crop = app.add_subcommand("crop", "crop every video to its target's enlarged box union");
  common(crop);
  crop->add_option("--manifest", manifest, "manifest CSV")->required();
  crop->add_option("--boxes", boxes, "directory of <facial_id_pair>.json box files")->required();
  crop->add_option("--out", out, "output directory (PNG frames per video)")->required();
  crop->add_option("--subset", subset_text, "C1, C2, C3 or all");
  given.push_back(crop->add_option("--enlarge", o.enlarge, "box enlargement factor"));
  given.push_back(crop->add_option("--order", o.crop_order, "enlarge-then-union or union-then-enlarge"));

  auto* extract = app.add_subcommand("extract", "per-frame handcrafted features");
  common(extract);
  extract->add_option("--model", model_name, "brisque or gmlog")->required();
  extract->add_option("--input", input, "one video file or frame directory");
  extract->add_option("--video-id", video_id, "id written for --input (default: file stem)");
  extract->add_option("--manifest", manifest, "manifest CSV (batch mode)");
  extract->add_option("--frames", frames_dir, "directory of cropped frame folders (batch mode)");
  extract->add_option("--subset", subset_text, "C1, C2, C3 or all");
  extract->add_option("--out", out, "CSV file (--input) or directory (batch)")->required();
  given.push_back(extract->add_option("--stride", o.stride, "keep every n-th frame"));

  auto* fuse = app.add_subcommand("fuse", "mean/std pooling of per-frame features");
  common(fuse);
  fuse->add_option("--input", input, "one per-frame CSV");
  fuse->add_option("--frames", frames_dir, "directory of <video_id>.csv files (batch mode)");
  fuse->add_option("--manifest", manifest, "manifest CSV (batch mode)");
  fuse->add_option("--subset", subset_text, "C1, C2, C3 or all");
  fuse->add_option("--out", out, "consolidated feature CSV")->required();

  auto* select = app.add_subcommand("select", "two-stage feature selection");
  common(select);
  select->add_option("--features", features, "consolidated feature CSV")->required();
  select->add_option("--manifest", manifest, "manifest CSV")->required();
  select->add_option("--subset", subset_text, "training subset");
  select->add_option("--k", fixed_k, "skip stage 1 and keep k features");
  select->add_flag("--force", force, "select even when the width is at most 1000");
  select->add_option("--out", out, "selection JSON")->required();

  auto* train = app.add_subcommand("train", "fit the SVR on one subset");
  common(train);
  svr_flags(train);
  train->add_option("--features", features, "consolidated feature CSV")->required();
  train->add_option("--manifest", manifest, "manifest CSV")->required();
  train->add_option("--subset", subset_text, "training subset");
  train->add_option("--selection", selection_path, "selection JSON");
  given.push_back(train->add_option("--seed-base", o.seed_base, "grid-search validation seed"));
  train->add_option("--out", out, "model JSON")->required();

  auto* eval = app.add_subcommand("eval", "score a trained model on one subset");
  common(eval);
  eval->add_option("--model", model_path, "model JSON")->required();
  eval->add_option("--features", features, "consolidated feature CSV")->required();
  eval->add_option("--manifest", manifest, "manifest CSV")->required();
  eval->add_option("--subset", subset_text, "evaluation subset");
  eval->add_option("--selection", selection_path, "selection JSON used at training time");
  given.push_back(eval->add_option("--level", o.level, "video or method"));
  eval->add_option("--out", out, "metrics JSON (default: stdout)");

  auto* bench = app.add_subcommand("bench", "full protocol run: splits, training, metrics");
  common(bench);
  svr_flags(bench);
  bench->add_option("--features", features, "consolidated feature CSV, or brisque/gmlog to extract from media")
      ->required();
  bench->add_option("--manifest", manifest, "manifest CSV")->required();
  bench->add_option("--boxes", boxes, "box directory (when extracting from media)");
  bench->add_option("--model", model_path, "trained model JSON whose hyperparameters are frozen (inter)");
  bench->add_option("--selection", selection_path, "selection JSON (reused instead of re-selecting)");
  bench->add_option("--feature-model", feature_model, "name recorded in the report");
  given.push_back(bench->add_option("--protocol", o.protocol, "facial-id, submit-id or inter"));
  given.push_back(bench->add_option("--level", o.level, "level summarized on stdout: video or method"));
  given.push_back(bench->add_option("--iterations", o.iterations, "protocol iterations"));
  given.push_back(bench->add_option("--seed-base", o.seed_base, "iteration i uses seed seed-base + i"));
  given.push_back(bench->add_option("--predictor", o.predictor, "svr or random"));
  given.push_back(bench->add_option("--test-subset", o.test_subset, "C1 or C2 (inter protocol)"));
  given.push_back(bench->add_option("--stride", o.stride, "keep every n-th frame (media extraction)"));
  bench->add_flag("--keep-predictions", "store per-video predictions in the report");
  bench->add_option("--predictions", input, "also write per-video predictions CSV here");
  bench->add_option("--out", out, "report JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage_error", e.what(), "run `vra --help` for the command list", kExitUsage);
  }

  try {
    if (!config_path.empty()) {
      require_file(config_path, "config file");
      load_config(config_path, s);
    }
    auto was_given = [&](const std::string& name) {
      for (auto* opt : given)
        if (opt->check_lname(name.substr(2)) && opt->count() > 0) return true;
      return false;
    };
    if (was_given("--jobs")) s.jobs = o.jobs;
    if (was_given("--kernel")) s.kernel = o.kernel;
    if (was_given("--C")) {
      s.C = o.C;
      s.search = false;
    }
    if (was_given("--gamma")) {
      s.gamma = o.gamma;
      s.search = false;
    }
    if (was_given("--epsilon")) s.epsilon = o.epsilon;
    if (was_given("--protocol")) s.protocol = o.protocol;
    if (was_given("--level")) s.level = o.level;
    if (was_given("--iterations")) s.iterations = o.iterations;
    if (was_given("--seed-base")) s.seed_base = o.seed_base;
    if (was_given("--predictor")) s.predictor = o.predictor;
    if (was_given("--test-subset")) s.test_subset = o.test_subset;
    if (was_given("--enlarge")) s.enlarge = o.enlarge;
    if (was_given("--order")) s.crop_order = o.crop_order;
    if (was_given("--stride")) s.stride = o.stride;
    if (was_given("--seed")) s.synth.seed = o.seed;
    if (s.level != "video" && s.level != "method") throw ConfigError("--level must be video or method");
    const std::optional<Subset> subset =
        subset_text == "all" ? std::nullopt : std::optional<Subset>(subset_arg(subset_text));

    if (*synth) {
      SynthConfig cfg = s.synth;
      if (media) {
        cfg.frame_width = s.media_width;
        cfg.frame_height = s.media_height;
      }
      const auto data = make_synthetic(cfg);
      write_synthetic(data, out);
      if (media) {
        std::map<std::string, const BoxTrack*> by_pair;
        for (const auto& t : data.boxes) by_pair[t.video_id] = &t;
        parallel_for(data.records.size(), s.jobs, [&](std::size_t i) {
          const auto& r = data.records[i];
          const auto frames = render_target_frames(*by_pair.at(r.facial_id_pair), cfg.frame_width,
                                                   cfg.frame_height, cfg.frame_width, cfg.frame_height,
                                                   derive_seed(cfg.seed, 1000 + i));
          write_frames(frames, out / r.path, FrameFormat::kVideo);
        });
      }
      std::cout << json{{"records", data.records.size()}, {"out", out.string()}, {"media", media}}.dump() << '\n';
      return 0;
    }

    if (*crop) {
      require_file(manifest, "manifest");
      auto records = load_manifest(manifest);
      if (subset) records = select_subset(records, *subset);
      std::vector<CropRegion> regions(records.size());
      parallel_for(records.size(), s.jobs, [&](std::size_t i) {
        const auto frames = read_frames(media_path(manifest, records[i]));
        regions[i] = region_for(boxes, records[i], frames.front().size(), s);
        write_frames(crop_frames(frames, regions[i]), out / records[i].video_id, FrameFormat::kPngDirectory);
      });
      std::string csv = "video_id,x,y,w,h,box_source\n";
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& g = regions[i];
        csv += records[i].video_id + "," + std::to_string(g.x) + "," + std::to_string(g.y) + "," +
               std::to_string(g.w) + "," + std::to_string(g.h) + "," + g.source_video_id + "\n";
      }
      write_text_file(out / "regions.csv", csv);
      std::cout << json{{"videos", records.size()}, {"out", out.string()}}.dump() << '\n';
      return 0;
    }

    if (*extract) {
      const auto model = parse_handcrafted_model(model_name);
      if (!input.empty()) {
        require_file(input, "input");
        const std::string id = video_id.empty() ? input.stem().string() : video_id;
        const auto m = extract_from_frames(model, read_frames(input, s.stride), id);
        write_features(m, out);
        std::cout << json{{"video_id", id}, {"frames", m.n_frames()}, {"width", m.width()}}.dump() << '\n';
        return 0;
      }
      require_file(manifest, "manifest");
      if (frames_dir.empty()) throw ConfigError("extract needs --input, or --manifest with --frames");
      auto records = load_manifest(manifest);
      if (subset) records = select_subset(records, *subset);
      parallel_for(records.size(), s.jobs, [&](std::size_t i) {
        const auto& id = records[i].video_id;
        write_features(extract_from_frames(model, read_frames(frames_dir / id, s.stride), id), out / (id + ".csv"));
      });
      std::cout << json{{"videos", records.size()}, {"width", feature_names(model).size()}}.dump() << '\n';
      return 0;
    }

    if (*fuse) {
      std::vector<VideoFeatureVector> vectors;
      if (!input.empty()) {
        require_file(input, "input");
        vectors.push_back(fuse_mean_std(load_features(input)));
      } else {
        require_file(manifest, "manifest");
        if (frames_dir.empty()) throw ConfigError("fuse needs --input, or --manifest with --frames");
        auto records = load_manifest(manifest);
        if (subset) records = select_subset(records, *subset);
        vectors.resize(records.size());
        parallel_for(records.size(), s.jobs, [&](std::size_t i) {
          const fs::path file = frames_dir / (records[i].video_id + ".csv");
          if (!fs::exists(file)) throw JoinError("no per-frame features for video '" + records[i].video_id + "'");
          vectors[i] = fuse_mean_std(load_features(file));
        });
      }
      write_video_features(vectors, out);
      std::cout << json{{"videos", vectors.size()}, {"width", vectors.front().values.size()}}.dump() << '\n';
      return 0;
    }

    if (*select) {
      const Dataset data = load_dataset(features, manifest, subset);
      SelectionResult result;
      SelectionConfig cfg = s.selection;
      cfg.jobs = s.jobs;
      if (data.cols() <= kSelectionMinWidth && !force) {
        result = identity_selection(data.cols(), data.feature_names);
      } else if (fixed_k > 0) {
        result = stage2_select(data.X, data.y, fixed_k, cfg);
        for (auto i : result.selected_indices) result.selected_names.push_back(data.feature_names[i]);
      } else {
        result = select_features(data.X, data.y, cfg, data.feature_names);
      }
      save_selection(result, out);
      std::cout << json{{"k", result.k}, {"width", data.cols()}}.dump() << '\n';
      return 0;
    }

    if (*train) {
      Dataset data = load_dataset(features, manifest, subset);
      if (!selection_path.empty()) data = apply_selection(data, load_selection(selection_path));
      SvrParams p = s.svr_params();
      if (s.search) {
        const auto g = grid_search(data.X, data.y, p, s.grid, s.seed_base);
        p.C = g.best_C;
        if (p.kernel.type == KernelType::kRbf) p.kernel.gamma = g.best_gamma;
      }
      const SvrModel m = train_svr(data.X, data.y, p, data.feature_names);
      save_model(m, out);
      std::cout << json{{"rows", data.rows()},
                        {"features", data.cols()},
                        {"C", m.C},
                        {"gamma", m.kernel.gamma},
                        {"support_vectors", m.dual_coeffs.size()}}
                       .dump()
                << '\n';
      return 0;
    }

    if (*eval) {
      require_file(model_path, "model");
      const SvrModel m = load_model(model_path);
      Dataset data = load_dataset(features, manifest, subset);
      if (!selection_path.empty()) data = apply_selection(data, load_selection(selection_path));
      const Eigen::VectorXd pred = predict(m, data.X, data.feature_names);
      std::vector<double> p(pred.data(), pred.data() + pred.size());
      std::vector<double> g(data.y.data(), data.y.data() + data.y.size());
      LevelMetrics lm;
      if (s.level == "method") {
        std::vector<std::string> ids;
        for (const auto& r : data.records) ids.push_back(r.submit_id);
        const auto agg = method_aggregate(p, g, ids);
        lm = evaluate_level(agg.pred, agg.gt);
      } else {
        lm = evaluate_level(p, g);
      }
      json j = level_json(lm);
      j["level"] = s.level;
      j["subset"] = subset_text;
      emit(j.dump(2) + "\n", out);
      return 0;
    }

    if (*bench) {
      const Protocol protocol = parse_protocol(s.protocol);
      require_file(manifest, "manifest");
      const auto all_records = load_manifest(manifest);
      const bool from_media = !fs::exists(features) && (features == "brisque" || features == "gmlog" ||
                                                        features == "gm-log");
      if (feature_model.empty()) feature_model = from_media ? features.string() : features.stem().string();

      auto build = [&](Subset which) {
        const auto records = select_subset(all_records, which);
        if (records.empty()) throw ValidationError("no manifest records in subset " + std::string(to_string(which)));
        if (from_media) {
          return consolidate(features_from_media(parse_handcrafted_model(features.string()), manifest, boxes,
                                                 records, s),
                             records);
        }
        require_file(features, "features file");
        return consolidate(restrict_to(load_video_features(features), records), records);
      };

      EvaluationReport report;
      const Dataset train_set = build(Subset::C3);
      if (protocol == Protocol::kInterSubset) {
        const Subset test_subset = subset_arg(s.test_subset);
        if (test_subset == Subset::C3) throw ConfigError("--test-subset must be C1 or C2 for the inter protocol");
        const Dataset test_set = build(test_subset);
        const SelectionResult sel = selection_path.empty()
                                        ? identity_selection(train_set.cols(), train_set.feature_names)
                                        : load_selection(selection_path);
        SvrParams frozen = s.svr_params();
        if (!model_path.empty()) {
          require_file(model_path, "model");
          const SvrModel m = load_model(model_path);
          frozen.kernel = m.kernel;
          frozen.C = m.C;
          frozen.epsilon = m.epsilon;
        }
        report = run_inter_subset(train_set, test_set, sel, frozen, feature_model, predictor_arg(s.predictor),
                                  s.seed_base);
      } else {
        BenchmarkConfig cfg;
        cfg.svr = s.svr_params();
        cfg.grid = s.grid;
        cfg.search_hyperparameters = s.search;
        cfg.predictor = predictor_arg(s.predictor);
        cfg.iterations = s.iterations;
        cfg.seed_base = s.seed_base;
        cfg.jobs = s.jobs;
        cfg.selection = s.selection;
        cfg.selection.jobs = s.jobs;
        cfg.keep_predictions = bench->count("--keep-predictions") > 0 || !input.empty();
        Dataset data = train_set;
        if (!selection_path.empty()) {
          data = apply_selection(data, load_selection(selection_path));
          cfg.select_features = false;
        } else {
          cfg.select_features = s.select_features;
        }
        report = run_benchmark(data, protocol, cfg, feature_model);
      }
      report.timestamp = utc_timestamp();
      if (!input.empty()) write_text_file(input, report_predictions_csv(report));
      emit(report_to_json(report), out);
      const auto& agg = s.level == "method" ? report.method : report.video;
      std::cerr << json{{"protocol", to_string(report.protocol)},
                        {"level", s.level},
                        {"iterations", report.iterations.size()},
                        {"skipped", report.skipped},
                        {"srcc", agg.srcc.mean},
                        {"plcc", agg.plcc.mean},
                        {"rmse", agg.rmse.mean}}
                       .dump()
                << '\n';
      return 0;
    }
  } catch (const Error& e) {
    const auto r = remedy_for(e.code());
    return report_error(e.code(), e.what(), r.hint, r.exit_code);
  } catch (const std::exception& e) {
    return report_error("internal_error", e.what(), "please report this with the command line used", kExitRuntime);
  }
  return 0;
}
