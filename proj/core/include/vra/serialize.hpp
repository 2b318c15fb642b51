#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vra/evaluation.hpp"
#include "vra/selection.hpp"
#include "vra/svr.hpp"

namespace vra {

/// Model JSON: kernel, hyperparameters, standardizer, support vectors, dual
/// coefficients, bias and feature names. Round-trips exactly.
std::string model_to_json(const SvrModel& model);
SvrModel model_from_json(std::string_view text, const std::string& source = "<model>");
void save_model(const SvrModel& model, const std::filesystem::path& path);
SvrModel load_model(const std::filesystem::path& path);

/// Selection JSON: k, indices, names, frequencies and the stage-1 curve.
std::string selection_to_json(const SelectionResult& selection);
SelectionResult selection_from_json(std::string_view text, const std::string& source = "<selection>");
void save_selection(const SelectionResult& selection, const std::filesystem::path& path);
SelectionResult load_selection(const std::filesystem::path& path);

/// Report JSON. The timestamp lives under `metadata` and is omitted when
/// empty, so two runs with identical inputs serialize identically apart
/// from that field.
std::string report_to_json(const EvaluationReport& report);
void save_report(const EvaluationReport& report, const std::filesystem::path& path);

/// Flat CSV (iteration, seed, video_id, submit_id, gt, pred, remapped) for
/// scatter plots. Requires predictions kept in the report.
std::string report_predictions_csv(const EvaluationReport& report);

/// Per-iteration metric rows (iteration, seed, level, srcc, plcc, rmse,
/// beta1..beta4, remap_fallback, skip_reason).
std::string report_metrics_csv(const EvaluationReport& report);

/// UTC ISO-8601, second resolution.
std::string utc_timestamp();

}  // namespace vra
