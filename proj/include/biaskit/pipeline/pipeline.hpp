#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biaskit/core/retry.hpp"
#include "biaskit/ingest/fetch.hpp"
#include "biaskit/pipeline/config.hpp"
#include "biaskit/pipeline/stages.hpp"

namespace biaskit::pipeline {

enum class Stage { Ingest, Faces, Train, Classify, Annotate, Validate, Stats };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);
// Comma separated stage names or "all". Result is deduplicated and in
// pipeline order.
std::vector<Stage> parse_stages(std::string_view csv);
std::vector<Stage> all_stages();

class LockHeld : public Error {
 public:
  using Error::Error;
};

// Exclusive ownership of an output directory through {dir}/.lock.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct StageRecord {
  std::string stage;
  nlohmann::json counts = nlohmann::json::object();
  std::int64_t wall_ms = 0;
};

struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::vector<StageRecord> stages;             // pipeline order, latest run of each
  std::map<std::string, std::string> outputs;  // path relative to out -> sha256
  std::int64_t wall_ms = 0;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

struct PipelineHooks {
  ingest::Transport* transport = nullptr;  // overrides fixtures and live HTTP
  Sleeper sleeper;                         // empty: real sleep
};

// Runs the stages in pipeline order, then emits the report when stats ran.
// Writes {out}/run_config.json and {out}/manifest.json. A stage's output
// directory is replaced only when the stage succeeds.
RunManifest run_pipeline(const RunConfig& config, const std::vector<Stage>& stages, const PipelineHooks& hooks = {});

}  // namespace biaskit::pipeline
