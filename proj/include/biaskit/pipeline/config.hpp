#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "biaskit/annotate/provider.hpp"
#include "biaskit/core/date.hpp"
#include "biaskit/face/face.hpp"
#include "biaskit/report/report.hpp"
#include "biaskit/svm/ensemble.hpp"

namespace biaskit::pipeline {

struct IngestSource {
  Venue venue = Venue::NYT;
  std::vector<std::string> sections;
};

struct IngestSettings {
  std::vector<IngestSource> sources;
  std::optional<DateRange> range;
  std::filesystem::path fixtures;  // empty: live archive
  std::filesystem::path denylists = "config";  // holds image_denylist/{nyt,fox}.json
  std::string archive_host = "https://web.archive.org";
  double rate_per_second = 1.0;
  unsigned parallelism = 4;
  int max_attempts = 4;
};

struct FacesSettings {
  std::filesystem::path embeddings;  // extractor output prefix
  double min_confidence = face::kMinConfidence;
  face::AreaMode area_mode = face::AreaMode::Image;
  std::filesystem::path observations;  // override for downstream stages
};

struct TrainSettings {
  std::filesystem::path embeddings;
  std::filesystem::path labels;
  bool grid_search = true;
  std::vector<double> c_grid{1.0, 10.0};
  std::vector<double> gamma_scales{1.0, 2.0};
  double c = 1.0;            // used without grid search
  double gamma_scale = 1.0;  // multiplies 1 / feature_dim
};

struct ModelPaths {
  std::filesystem::path a;
  std::filesystem::path b;
};

struct ClassifySettings {
  svm::MergeMode merge_mode = svm::MergeMode::Label;
  std::filesystem::path predictions;  // override for downstream stages
};

struct AnnotateSettings {
  std::string tasks = "emotion,sentiment,topic,race,vp";
  annotate::ProviderSettings provider;
  std::size_t chunk_limit = 0;
  std::string timestamp;  // empty: wall clock
  unsigned parallelism = 4;
  std::filesystem::path annotations;  // override for downstream stages
};

struct ValidateSettings {
  std::filesystem::path ratings;
};

struct StatsSettings {
  report::StatsOptions options;
  std::optional<double> min_race_confidence;
};

// Every path is absolute once loaded; relative paths in a config file are
// resolved against the file's directory.
struct RunConfig {
  std::filesystem::path out = "run";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::filesystem::path corpus;  // empty: {out}/corpus
  IngestSettings ingest;
  FacesSettings faces;
  TrainSettings train;
  ModelPaths models;  // empty: {out}/models/model_{a,b}.bksvm
  ClassifySettings classify;
  AnnotateSettings annotate;
  ValidateSettings validate;
  StatsSettings stats;

  std::filesystem::path corpus_dir() const;
  std::filesystem::path filtered_prefix() const;
  std::filesystem::path observations_path() const;
  std::filesystem::path model_a() const;
  std::filesystem::path model_b() const;
  std::filesystem::path predictions_path() const;
  std::filesystem::path annotations_path() const;
  std::filesystem::path annotation_cache() const;
  std::filesystem::path validation_path() const;
  std::filesystem::path stats_dir() const;
  std::filesystem::path report_dir() const;
};

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace biaskit::pipeline
