#include "vra/serialize.hpp"

#include <algorithm>
#include <ctime>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "vra/datamodel.hpp"
#include "vra/error.hpp"

namespace vra {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& source) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(source + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(source + ": field '" + key + "': " + e.what());
  }
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json level_json(const LevelMetrics& m) {
  return {{"srcc", m.srcc},
          {"plcc", m.plcc},
          {"rmse", m.rmse},
          {"n", m.n},
          {"logistic",
           {{"beta1", m.logistic.beta1},
            {"beta2", m.logistic.beta2},
            {"beta3", m.logistic.beta3},
            {"beta4", m.logistic.beta4},
            {"fallback", m.remap_fallback}}}};
}

json aggregate_json(const LevelAggregate& a) {
  auto summary = [](const MetricSummary& s) { return json{{"mean", s.mean}, {"std", s.std}}; };
  return {{"srcc", summary(a.srcc)}, {"plcc", summary(a.plcc)}, {"rmse", summary(a.rmse)}, {"count", a.count}};
}

}  // namespace

std::string model_to_json(const SvrModel& m) {
  json sv = json::array();
  for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) {
    const Eigen::VectorXd row = m.support_vectors.row(i).transpose();
    sv.push_back(vector_json(row));
  }
  json doc = {
      {"format", "vra-svr-model"},
      {"version", 1},
      {"kernel", m.kernel.type == KernelType::kLinear ? "linear" : "rbf"},
      {"gamma", m.kernel.gamma},
      {"C", m.C},
      {"epsilon", m.epsilon},
      {"feature_names", m.feature_names},
      {"standardizer", {{"mean", vector_json(m.standardizer.mean)}, {"scale", vector_json(m.standardizer.scale)}}},
      {"support_vectors", sv},
      {"support_indices", m.support_indices},
      {"dual_coeffs", vector_json(m.dual_coeffs)},
      {"bias", m.bias},
      {"solver", {{"iterations", m.iterations}, {"kkt_violation", m.kkt_violation}, {"objective", m.objective}}},
  };
  return doc.dump(2) + "\n";
}

SvrModel model_from_json(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  if (field<std::string>(doc, "format", source) != "vra-svr-model")
    throw ParseError(source + ": not a vra-svr-model document");
  if (field<int>(doc, "version", source) != 1) throw ParseError(source + ": unsupported model version");
  SvrModel m;
  const auto kernel = field<std::string>(doc, "kernel", source);
  if (kernel == "linear") {
    m.kernel = Kernel::linear();
  } else if (kernel == "rbf") {
    m.kernel = Kernel::rbf(field<double>(doc, "gamma", source));
  } else {
    throw ParseError(source + ": unknown kernel '" + kernel + "'");
  }
  m.C = field<double>(doc, "C", source);
  m.epsilon = field<double>(doc, "epsilon", source);
  m.feature_names = field<std::vector<std::string>>(doc, "feature_names", source);
  const json& st = doc.at("standardizer");
  m.standardizer.mean = vector_from(field<std::vector<double>>(st, "mean", source));
  m.standardizer.scale = vector_from(field<std::vector<double>>(st, "scale", source));
  const auto sv = field<std::vector<std::vector<double>>>(doc, "support_vectors", source);
  const auto width = m.standardizer.width();
  if (m.standardizer.scale.size() != width) throw ValidationError(source + ": standardizer widths differ");
  if (!m.feature_names.empty() && static_cast<Eigen::Index>(m.feature_names.size()) != width)
    throw ValidationError(source + ": feature_names do not match the model width");
  m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), width);
  for (std::size_t i = 0; i < sv.size(); ++i) {
    if (static_cast<Eigen::Index>(sv[i].size()) != width)
      throw ValidationError(source + ": support vector " + std::to_string(i) + " has the wrong width");
    m.support_vectors.row(static_cast<Eigen::Index>(i)) = vector_from(sv[i]).transpose();
  }
  m.dual_coeffs = vector_from(field<std::vector<double>>(doc, "dual_coeffs", source));
  if (m.dual_coeffs.size() != m.support_vectors.rows())
    throw ValidationError(source + ": dual_coeffs and support_vectors differ in length");
  if (doc.contains("support_indices"))
    m.support_indices = field<std::vector<std::size_t>>(doc, "support_indices", source);
  m.bias = field<double>(doc, "bias", source);
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    m.iterations = field<std::int64_t>(s, "iterations", source);
    m.kkt_violation = field<double>(s, "kkt_violation", source);
    m.objective = field<double>(s, "objective", source);
  }
  return m;
}

void save_model(const SvrModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

SvrModel load_model(const std::filesystem::path& path) { return model_from_json(read_text_file(path), path.string()); }

std::string selection_to_json(const SelectionResult& s) {
  json curve = json::array();
  for (const auto& p : s.stage1_scores)
    curve.push_back({{"k", p.k}, {"mean_plcc", p.mean_plcc}, {"valid_iterations", p.valid_iterations}});
  const json doc = {
      {"format", "vra-selection"},      {"version", 1},
      {"k", s.k},                       {"selected_indices", s.selected_indices},
      {"selected_names", s.selected_names}, {"frequency", s.frequency},
      {"stage1", curve},                {"stage2_iterations", s.stage2_iterations},
      {"skipped_iterations", s.skipped_iterations},
  };
  return doc.dump(2) + "\n";
}

SelectionResult selection_from_json(std::string_view text, const std::string& source) {
  const json doc = parse_json(text, source);
  if (field<std::string>(doc, "format", source) != "vra-selection")
    throw ParseError(source + ": not a vra-selection document");
  SelectionResult s;
  s.k = field<std::size_t>(doc, "k", source);
  s.selected_indices = field<std::vector<std::size_t>>(doc, "selected_indices", source);
  s.selected_names = field<std::vector<std::string>>(doc, "selected_names", source);
  s.frequency = field<std::vector<int>>(doc, "frequency", source);
  if (s.selected_indices.size() != s.k) throw ValidationError(source + ": k does not match selected_indices");
  if (!std::is_sorted(s.selected_indices.begin(), s.selected_indices.end()))
    throw ValidationError(source + ": selected_indices must be ascending");
  if (doc.contains("stage1")) {
    for (const json& p : doc.at("stage1")) {
      s.stage1_scores.push_back({field<std::size_t>(p, "k", source), field<double>(p, "mean_plcc", source),
                                 field<int>(p, "valid_iterations", source)});
    }
  }
  if (doc.contains("stage2_iterations")) s.stage2_iterations = field<int>(doc, "stage2_iterations", source);
  if (doc.contains("skipped_iterations")) s.skipped_iterations = field<int>(doc, "skipped_iterations", source);
  return s;
}

void save_selection(const SelectionResult& selection, const std::filesystem::path& path) {
  write_text_file(path, selection_to_json(selection));
}

SelectionResult load_selection(const std::filesystem::path& path) {
  return selection_from_json(read_text_file(path), path.string());
}

std::string report_to_json(const EvaluationReport& r) {
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    json row = {
        {"seed", it.seed},
        {"held_out", it.split.held_out},
        {"n_train", it.split.train_ids.size()},
        {"n_test", it.split.test_ids.size()},
        {"C", it.C},
        {"gamma", it.gamma},
        {"video", it.video ? level_json(*it.video) : json(nullptr)},
        {"method", it.method ? level_json(*it.method) : json(nullptr)},
    };
    if (!it.skip_reason.empty()) row["skip_reason"] = it.skip_reason;
    iterations.push_back(std::move(row));
  }
  json doc = {
      {"protocol", std::string(to_string(r.protocol))},
      {"feature_model", r.feature_model},
      {"predictor", r.predictor},
      {"selected_features", r.selected_features},
      {"iterations", iterations},
      {"aggregate", aggregate_json(r.video)},
      {"method_aggregate", aggregate_json(r.method)},
      {"skipped", r.skipped},
  };
  if (!r.timestamp.empty()) doc["metadata"] = {{"timestamp", r.timestamp}};
  return doc.dump(2) + "\n";
}

void save_report(const EvaluationReport& report, const std::filesystem::path& path) {
  write_text_file(path, report_to_json(report));
}

std::string report_predictions_csv(const EvaluationReport& r) {
  std::string out = "iteration,seed,video_id,submit_id,gt,pred,remapped\n";
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    for (const auto& p : it.predictions) {
      csv::append_row(out, {std::to_string(i), std::to_string(it.seed), p.video_id, p.submit_id,
                            format_double(p.gt), format_double(p.pred), format_double(p.remapped)});
    }
  }
  return out;
}

std::string report_metrics_csv(const EvaluationReport& r) {
  std::string out = "iteration,seed,level,srcc,plcc,rmse,beta1,beta2,beta3,beta4,remap_fallback,skip_reason\n";
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    const auto& it = r.iterations[i];
    auto emit = [&](const char* level, const std::optional<LevelMetrics>& m) {
      if (!m) {
        csv::append_row(out, {std::to_string(i), std::to_string(it.seed), level, "", "", "", "", "", "", "", "",
                              it.skip_reason});
        return;
      }
      csv::append_row(out, {std::to_string(i), std::to_string(it.seed), level, format_double(m->srcc),
                            format_double(m->plcc), format_double(m->rmse), format_double(m->logistic.beta1),
                            format_double(m->logistic.beta2), format_double(m->logistic.beta3),
                            format_double(m->logistic.beta4), m->remap_fallback ? "1" : "0", ""});
    };
    emit("video", it.video);
    emit("method", it.method);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace vra
