#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biaskit/metrics/metrics.hpp"
#include "biaskit/report/table.hpp"
#include "biaskit/stats/aggregate.hpp"

namespace biaskit::report {

struct ArtifactInfo {
  std::string_view name;
  std::string_view artifact;
  std::string_view title;
};

// Every table the report can hold, in bundle order.
std::span<const ArtifactInfo> artifacts();
const ArtifactInfo* find_artifact(std::string_view name);

struct StatsOptions {
  stats::Chi2Mode chi2_mode = stats::Chi2Mode::GroupVsRest;
  bool pooled_variance = false;
  bool vp_unspecified = false;
};

stats::Chi2Mode chi2_mode_from_string(std::string_view s);

// All statistics tables except validation, in bundle order. Text records
// must already carry any race-confidence filtering.
std::vector<Table> build_tables(std::span<const stats::TextObservation> text,
                                std::span<const stats::FaceObservation> faces, const StatsOptions& options);

// One row of agreement and quality figures for a validation task.
struct ValidationRow {
  std::string task;
  std::size_t items = 0;
  std::size_t no_majority = 0;
  std::size_t missing_predictions = 0;
  std::size_t scored = 0;
  std::optional<double> alpha;
  std::optional<double> kappa;
  std::optional<double> f1_macro;
  std::optional<double> f1_weighted;
  std::optional<double> accuracy;
};

// ratings: per item, the raters' labels (nullopt = missing). preds: the
// model label per item, nullopt when the pipeline has none.
ValidationRow validate_task(const std::string& task, const std::vector<std::vector<std::optional<std::string>>>& ratings,
                            const std::vector<std::optional<std::string>>& preds);

Table validation_table(const std::vector<ValidationRow>& rows);

struct ReportIndexEntry {
  std::string name;
  std::string artifact;
  std::string csv;
  std::string json;
  std::size_t rows = 0;
};

// Reads {name}.json tables from stats_dir and writes {name}.csv and
// {name}.json for each known artifact found, plus index.json. An empty or
// missing stats directory yields an index with no entries and a warning.
std::vector<ReportIndexEntry> emit_report(const std::filesystem::path& stats_dir, const std::filesystem::path& out_dir);

}  // namespace biaskit::report
