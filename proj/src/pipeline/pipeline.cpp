#include "biaskit/pipeline/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>

#include "biaskit/annotate/annotate.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/hash.hpp"
#include "biaskit/core/log.hpp"
#include "biaskit/face/embedding_io.hpp"
#include "biaskit/ingest/ingest.hpp"

namespace biaskit::pipeline {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 7> kStageNames{"ingest",   "faces",    "train", "classify",
                                                      "annotate", "validate", "stats"};

// Output directory written under {name}.partial and renamed on commit.
class StagedDir {
 public:
  explicit StagedDir(fs::path final_dir) : final_(std::move(final_dir)), partial_(final_) {
    partial_ += ".partial";
    fs::remove_all(partial_);
    fs::create_directories(partial_);
  }
  ~StagedDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(partial_, ec);
    }
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;

  const fs::path& path() const { return partial_; }

  void commit() {
    fs::remove_all(final_);
    fs::rename(partial_, final_);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path partial_;
  bool committed_ = false;
};

void require(bool ok, std::string_view stage, const std::string& artifact) {
  if (!ok) throw StageDependencyError(std::string(stage), artifact);
}

void require_file(const fs::path& p, std::string_view stage, std::string_view what) {
  require(!p.empty() && fs::is_regular_file(p), stage,
          p.empty() ? std::string(what) : fmt::format("{} ({})", what, p.string()));
}

void require_embeddings(const fs::path& prefix, std::string_view stage, std::string_view what) {
  require(!prefix.empty(), stage, std::string(what));
  const auto paths = face::embedding_paths(prefix);
  require_file(paths.manifest, stage, what);
  require_file(paths.blob, stage, what);
}

fs::path corpus_manifest(const RunConfig& c) { return c.corpus_dir() / "manifest.json"; }

std::vector<ingest::ArticleRecord> load_corpus(const RunConfig& c, std::string_view stage) {
  require_file(corpus_manifest(c), stage, "corpus manifest");
  return ingest::CorpusStore(c.corpus_dir()).load();
}

json run_ingest_stage(const RunConfig& c, const PipelineHooks& hooks) {
  if (c.ingest.sources.empty()) throw ConfigurationError("ingest: no sources configured");
  if (!c.ingest.range) throw ConfigurationError("ingest: from and to dates are required");
  std::unique_ptr<ingest::Transport> owned;
  ingest::Transport* transport = hooks.transport;
  if (!transport) {
    if (!c.ingest.fixtures.empty())
      owned = std::make_unique<ingest::FixtureTransport>(c.ingest.fixtures);
    else
      owned = std::make_unique<ingest::HttpTransport>();
    transport = owned.get();
  }
  const Sleeper sleeper = hooks.sleeper ? hooks.sleeper : real_sleeper();
  json counts = json::object();
  for (const auto& src : c.ingest.sources) {
    ingest::IngestConfig ic;
    ic.venue = src.venue;
    ic.range = *c.ingest.range;
    ic.sections = src.sections;
    ic.out = c.corpus_dir();
    ic.config_dir = c.ingest.denylists;
    ic.archive_host = c.ingest.archive_host;
    ic.rate_per_second = c.ingest.rate_per_second;
    ic.parallelism = c.ingest.parallelism;
    ic.retry.max_attempts = c.ingest.max_attempts;
    const auto r = ingest::run_ingest(ic, *transport, sleeper);
    json v = {{"snapshots", r.snapshots},
              {"snapshots_unavailable", r.snapshots_unavailable},
              {"snapshot_parse_failures", r.snapshot_parse_failures},
              {"links", r.links},
              {"duplicates_dropped", r.duplicates_dropped},
              {"articles_written", r.articles_written},
              {"articles_already_stored", r.articles_already_stored},
              {"articles_failed", r.articles_failed},
              {"articles_out_of_range", r.articles_out_of_range},
              {"images", r.images},
              {"images_unfetched", r.images_unfetched}};
    const auto key = venue_key(src.venue);
    if (counts.contains(key))
      for (auto& [k, val] : v.items()) counts[key][k] = counts[key][k].get<std::size_t>() + val.get<std::size_t>();
    else
      counts[key] = v;
  }
  return counts;
}

json run_faces_stage(const RunConfig& c) {
  require_embeddings(c.faces.embeddings, "faces", "face embeddings");
  const auto corpus = load_corpus(c, "faces");
  auto detected = face::read_embeddings(face::embedding_paths(c.faces.embeddings));
  auto res = join_faces(corpus, std::move(detected), c.faces.min_confidence, c.faces.area_mode);
  StagedDir dir(c.out / "faces");
  face::write_embeddings(face::embedding_paths(dir.path() / "filtered"), res.kept);
  write_observations(dir.path() / "observations.jsonl", res.observations);
  dir.commit();
  return {{"detected", res.detected},
          {"filtered", res.filtered},
          {"unattributed", res.unattributed},
          {"observations", res.observations.size()}};
}

json space_json(const TrainedSpace& s) {
  return {{"c", s.c},
          {"gamma", s.gamma},
          {"validation_accuracy", s.validation_accuracy ? json(*s.validation_accuracy) : json(nullptr)},
          {"support_vectors", s.model.support_vectors.rows},
          {"machines", s.model.machines.size()}};
}

json run_train_stage(const RunConfig& c) {
  require_embeddings(c.train.embeddings, "train", "training embeddings");
  require_file(c.train.labels, "train", "training labels");
  const auto set = load_training_set(c.train.embeddings, c.train.labels);
  const auto a = train_space(set.a, set.labels, c.train, c.seed, c.threads);
  const auto b = train_space(set.b, set.labels, c.train, c.seed, c.threads);
  StagedDir dir(c.out / "models");
  svm::save_model(a.model, dir.path() / "model_a.bksvm");
  svm::save_model(b.model, dir.path() / "model_b.bksvm");
  const json summary = {{"faces", set.labels.size()}, {"model_a", space_json(a)}, {"model_b", space_json(b)}};
  write_file_atomic(dir.path() / "training.json", summary.dump(2) + "\n");
  dir.commit();
  return summary;
}

json run_classify_stage(const RunConfig& c) {
  require_file(c.model_a(), "classify", "model_a");
  require_file(c.model_b(), "classify", "model_b");
  require_embeddings(c.filtered_prefix(), "classify", "filtered faces");
  svm::SvmEnsemble ens{svm::load_model(c.model_a()), svm::load_model(c.model_b()), c.classify.merge_mode};
  const auto faces = face::read_embeddings(face::embedding_paths(c.filtered_prefix()));
  const auto preds = classify_all(faces, ens, c.threads);
  StagedDir dir(c.out / "classify");
  write_predictions(dir.path() / "predictions.jsonl", preds);
  dir.commit();
  json by_race = json::object();
  for (auto r : all_labels<Race6>()) by_race[std::string(to_string(r))] = 0;
  for (const auto& p : preds) by_race[std::string(to_string(p.race))] = by_race[std::string(to_string(p.race))].get<int>() + 1;
  return {{"classified", preds.size()}, {"by_race", by_race}};
}

json run_annotate_stage(const RunConfig& c) {
  const auto corpus = load_corpus(c, "annotate");
  if (c.annotate.provider.name == "stub" && !c.annotate.provider.stub_table.empty())
    require_file(c.annotate.provider.stub_table, "annotate", "stub annotation table");
  fs::create_directories(c.annotation_cache().parent_path());
  const auto records = annotate_corpus(corpus, c.annotate, c.annotation_cache());
  StagedDir dir(c.out / "annotations");
  annotate::write_annotations(dir.path() / "annotations.jsonl", records);
  dir.commit();
  std::size_t emotion = 0, sentiment = 0, topic = 0, race = 0, vp = 0, failed = 0;
  for (const auto& r : records) {
    emotion += r.emotion.has_value();
    sentiment += r.sentiment.has_value();
    topic += r.topic.has_value();
    race += r.race.has_value();
    vp += r.vp.has_value();
    failed += !r.errors.empty();
  }
  return {{"articles", records.size()}, {"emotion", emotion}, {"sentiment", sentiment}, {"topic", topic},
          {"race", race},               {"vp", vp},           {"with_errors", failed}};
}

json run_validate_stage(const RunConfig& c) {
  require_file(c.validate.ratings, "validate", "ratings");
  const auto items = read_ratings(c.validate.ratings);
  bool faces = false, text = false;
  for (const auto& i : items) (is_face_task(i.task) ? faces : text) = true;
  PredictionIndex idx;
  if (faces) {
    require_file(c.predictions_path(), "validate", "predictions");
    require_file(c.observations_path(), "validate", "face observations");
    idx = face_prediction_index(read_predictions(c.predictions_path()), read_observations(c.observations_path()));
  }
  if (text) {
    require_file(c.annotations_path(), "validate", "annotations");
    for (auto& [task, m] : text_prediction_index(annotate::read_annotations(c.annotations_path())))
      idx[task] = std::move(m);
  }
  const auto rows = validate_ratings(items, idx);
  StagedDir dir(c.out / "validation");
  write_file_atomic(dir.path() / "table6_validation.json", report::to_json(report::validation_table(rows)).dump(2) + "\n");
  dir.commit();
  json tasks = json::object();
  for (const auto& r : rows) tasks[r.task] = {{"items", r.items}, {"scored", r.scored}, {"no_majority", r.no_majority}};
  return {{"items", items.size()}, {"tasks", tasks}};
}

json run_stats_stage(const RunConfig& c) {
  const auto corpus = load_corpus(c, "stats");
  require_file(c.annotations_path(), "stats", "annotations");
  require_file(c.observations_path(), "stats", "face observations");
  require_file(c.predictions_path(), "stats", "predictions");
  const auto text = join_text(corpus, annotate::read_annotations(c.annotations_path()), c.stats.min_race_confidence);
  const auto faces = join_face_predictions(read_observations(c.observations_path()), read_predictions(c.predictions_path()));
  const auto tables = report::build_tables(text, faces, c.stats.options);
  StagedDir dir(c.stats_dir());
  for (const auto& t : tables) write_file_atomic(dir.path() / (t.name + ".json"), report::to_json(t).dump(2) + "\n");
  const bool validation = fs::is_regular_file(c.validation_path());
  if (validation) fs::copy_file(c.validation_path(), dir.path() / c.validation_path().filename());
  dir.commit();
  std::size_t with_race = 0;
  for (const auto& f : faces) with_race += f.race.has_value();
  return {{"text_records", text.size()},
          {"face_observations", faces.size()},
          {"faces_with_race", with_race},
          {"tables", tables.size() + (validation ? 1 : 0)}};
}

json run_report(const RunConfig& c) {
  StagedDir dir(c.report_dir());
  const auto entries = report::emit_report(c.stats_dir(), dir.path());
  dir.commit();
  return {{"tables", entries.size()}};
}

std::map<std::string, std::string> hash_inputs(const RunConfig& c) {
  std::vector<fs::path> files;
  auto add_prefix = [&](const fs::path& prefix) {
    if (prefix.empty()) return;
    const auto p = face::embedding_paths(prefix);
    files.push_back(p.manifest);
    files.push_back(p.blob);
  };
  add_prefix(c.faces.embeddings);
  add_prefix(c.train.embeddings);
  files.push_back(c.train.labels);
  files.push_back(c.validate.ratings);
  files.push_back(c.annotate.provider.stub_table);
  files.push_back(c.corpus_dir() / "manifest.json");
  std::map<std::string, std::string> out;
  for (const auto& f : files)
    if (!f.empty() && fs::is_regular_file(f)) out[f.string()] = sha256_file(f);
  return out;
}

std::map<std::string, std::string> hash_outputs(const fs::path& out) {
  std::map<std::string, std::string> hashes;
  if (!fs::is_directory(out)) return hashes;
  for (auto it = fs::recursive_directory_iterator(out); it != fs::recursive_directory_iterator(); ++it) {
    const auto rel = fs::relative(it->path(), out).generic_string();
    if (it->is_directory() && it->path().extension() == ".partial") {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    if (rel == ".lock" || rel == "manifest.json") continue;
    hashes[rel] = sha256_file(it->path());
  }
  return hashes;
}

}  // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

Stage stage_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == s) return static_cast<Stage>(i);
  throw InvalidInput(fmt::format("unknown stage '{}'", s));
}

std::vector<Stage> all_stages() {
  std::vector<Stage> out;
  for (std::size_t i = 0; i < kStageNames.size(); ++i) out.push_back(static_cast<Stage>(i));
  return out;
}

std::vector<Stage> parse_stages(std::string_view csv) {
  if (csv == "all") return all_stages();
  std::set<Stage> set;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto comma = std::min(csv.find(',', pos), csv.size());
    auto name = csv.substr(pos, comma - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) set.insert(stage_from_string(name));
    pos = comma + 1;
  }
  if (set.empty()) throw InvalidInput("no stages given");
  return {set.begin(), set.end()};
}

RunLock::RunLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f) throw LockHeld(fmt::format("output directory {} is locked by another run", dir.string()));
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

json to_json(const RunManifest& m) {
  json stages = json::array();
  for (const auto& s : m.stages) stages.push_back({{"stage", s.stage}, {"counts", s.counts}, {"wall_ms", s.wall_ms}});
  return {{"tool_version", m.tool_version}, {"config_hash", m.config_hash}, {"inputs", m.inputs},
          {"stages", stages},               {"outputs", m.outputs},         {"wall_ms", m.wall_ms}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    for (const auto& s : j.at("stages"))
      m.stages.push_back({s.at("stage").get<std::string>(), s.at("counts"), s.at("wall_ms").get<std::int64_t>()});
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.wall_ms = j.at("wall_ms").get<std::int64_t>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("run manifest: ") + e.what());
  }
}

RunManifest run_pipeline(const RunConfig& config, const std::vector<Stage>& stages, const PipelineHooks& hooks) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  RunConfig c = config;
  std::set<Stage> selected(stages.begin(), stages.end());
  // a stage that runs now supersedes any override pointing at older output
  if (selected.count(Stage::Faces)) c.faces.observations.clear();
  if (selected.count(Stage::Train)) c.models = {};
  if (selected.count(Stage::Classify)) c.classify.predictions.clear();
  if (selected.count(Stage::Annotate)) c.annotate.annotations.clear();

  fs::create_directories(c.out);
  RunLock lock(c.out);
  const json config_json = to_json(c);
  write_file_atomic(c.out / "run_config.json", config_json.dump(2) + "\n");

  const auto manifest_path = c.out / "manifest.json";
  RunManifest m;
  if (fs::is_regular_file(manifest_path)) {
    try {
      m = manifest_from_json(json::parse(read_file(manifest_path)));
    } catch (const std::exception& e) {
      log::warn("manifest_unreadable", {{"path", manifest_path.string()}, {"error", e.what()}});
      m = {};
    }
  }
  m.tool_version = BIASKIT_VERSION;
  m.config_hash = sha256_hex(config_json.dump());

  auto record = [&](std::string name, json counts, std::int64_t ms) {
    auto it = std::find_if(m.stages.begin(), m.stages.end(), [&](const StageRecord& s) { return s.stage == name; });
    if (it != m.stages.end())
      *it = {std::move(name), std::move(counts), ms};
    else
      m.stages.push_back({std::move(name), std::move(counts), ms});
  };

  const std::map<Stage, std::function<json()>> runners{
      {Stage::Ingest, [&] { return run_ingest_stage(c, hooks); }},
      {Stage::Faces, [&] { return run_faces_stage(c); }},
      {Stage::Train, [&] { return run_train_stage(c); }},
      {Stage::Classify, [&] { return run_classify_stage(c); }},
      {Stage::Annotate, [&] { return run_annotate_stage(c); }},
      {Stage::Validate, [&] { return run_validate_stage(c); }},
      {Stage::Stats, [&] { return run_stats_stage(c); }},
  };
  for (auto s : selected) {
    const auto ts = Clock::now();
    log::info("stage_start", {{"stage", std::string(to_string(s))}});
    auto counts = runners.at(s)();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - ts).count();
    log::info("stage_done", {{"stage", std::string(to_string(s))}, {"wall_ms", ms}, {"counts", counts}});
    record(std::string(to_string(s)), std::move(counts), ms);
  }
  if (selected.count(Stage::Stats)) {
    const auto ts = Clock::now();
    auto counts = run_report(c);
    record("report", std::move(counts), std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - ts).count());
  }
  std::sort(m.stages.begin(), m.stages.end(), [](const StageRecord& a, const StageRecord& b) {
    auto rank = [](const std::string& n) {
      return n == "report" ? kStageNames.size() : static_cast<std::size_t>(stage_from_string(n));
    };
    return rank(a.stage) < rank(b.stage);
  });

  auto count_of = [&](std::string_view stage, const char* key) -> std::optional<std::size_t> {
    for (const auto& s : m.stages)
      if (s.stage == stage && s.counts.contains(key)) return s.counts[key].get<std::size_t>();
    return std::nullopt;
  };
  const auto detected = count_of("faces", "detected");
  const auto filtered = count_of("faces", "filtered");
  const auto classified = count_of("classify", "classified");
  if ((detected && filtered && *filtered > *detected) || (filtered && classified && *classified > *filtered))
    throw Error("run manifest counts are inconsistent: classified <= filtered <= detected does not hold");

  m.inputs = hash_inputs(c);
  m.outputs = hash_outputs(c.out);
  m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  write_file_atomic(manifest_path, to_json(m).dump(2) + "\n");
  return m;
}

}  // namespace biaskit::pipeline
