#include "biaskit/pipeline/config.hpp"

#include <fmt/format.h>

#include <set>

#include "biaskit/core/error.hpp"
#include "biaskit/core/files.hpp"

namespace biaskit::pipeline {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, std::string_view where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigurationError(fmt::format("config: {} must be an object", where));
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigurationError(fmt::format("config: unknown key '{}' in {}", key, where));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

void get_path(const json& j, const char* key, const fs::path& base, fs::path& out) {
  if (j.contains(key) && !j[key].is_null()) out = resolve(base, j[key].get<std::string>());
}

std::string path_str(const fs::path& p) { return p.string(); }

}  // namespace

fs::path RunConfig::corpus_dir() const { return corpus.empty() ? out / "corpus" : corpus; }
fs::path RunConfig::filtered_prefix() const { return out / "faces" / "filtered"; }
fs::path RunConfig::observations_path() const {
  return faces.observations.empty() ? out / "faces" / "observations.jsonl" : faces.observations;
}
fs::path RunConfig::model_a() const { return models.a.empty() ? out / "models" / "model_a.bksvm" : models.a; }
fs::path RunConfig::model_b() const { return models.b.empty() ? out / "models" / "model_b.bksvm" : models.b; }
fs::path RunConfig::predictions_path() const {
  return classify.predictions.empty() ? out / "classify" / "predictions.jsonl" : classify.predictions;
}
fs::path RunConfig::annotations_path() const {
  return annotate.annotations.empty() ? out / "annotations" / "annotations.jsonl" : annotate.annotations;
}
fs::path RunConfig::annotation_cache() const { return out / "cache" / "annotation_cache.jsonl"; }
fs::path RunConfig::validation_path() const { return out / "validation" / "table6_validation.json"; }
fs::path RunConfig::stats_dir() const { return out / "stats"; }
fs::path RunConfig::report_dir() const { return out / "report"; }

RunConfig config_from_json(const json& j, const fs::path& base_dir) {
  const fs::path base = fs::absolute(base_dir);
  RunConfig c;
  try {
    check_keys(j, "config", {"out", "seed", "threads", "corpus", "ingest", "faces", "train", "models", "classify",
                             "annotate", "validate", "stats"});
    get_path(j, "out", base, c.out);
    if (!j.contains("out")) c.out = base / "run";
    get(j, "seed", c.seed);
    get(j, "threads", c.threads);
    get_path(j, "corpus", base, c.corpus);

    if (j.contains("ingest")) {
      const auto& s = j["ingest"];
      check_keys(s, "ingest", {"sources", "from", "to", "fixtures", "denylists", "archive_host", "rate", "parallelism",
                               "max_attempts"});
      if (s.contains("sources")) {
        for (const auto& src : s["sources"]) {
          check_keys(src, "ingest.sources[]", {"venue", "sections"});
          IngestSource is;
          is.venue = label_from_string<Venue>(src.at("venue").get<std::string>());
          is.sections = src.at("sections").get<std::vector<std::string>>();
          c.ingest.sources.push_back(std::move(is));
        }
      }
      if (s.contains("from") || s.contains("to")) {
        if (!s.contains("from") || !s.contains("to")) throw ConfigurationError("config: ingest needs both from and to");
        c.ingest.range = DateRange{Date::parse(s["from"].get<std::string>()), Date::parse(s["to"].get<std::string>())};
      }
      get_path(s, "fixtures", base, c.ingest.fixtures);
      get_path(s, "denylists", base, c.ingest.denylists);
      get(s, "archive_host", c.ingest.archive_host);
      get(s, "rate", c.ingest.rate_per_second);
      get(s, "parallelism", c.ingest.parallelism);
      get(s, "max_attempts", c.ingest.max_attempts);
    }
    if (c.ingest.denylists.is_relative()) c.ingest.denylists = resolve(base, c.ingest.denylists.string());
    if (j.contains("faces")) {
      const auto& s = j["faces"];
      check_keys(s, "faces", {"embeddings", "min_confidence", "area_mode", "observations"});
      get_path(s, "embeddings", base, c.faces.embeddings);
      get(s, "min_confidence", c.faces.min_confidence);
      if (s.contains("area_mode")) c.faces.area_mode = face::area_mode_from_string(s["area_mode"].get<std::string>());
      get_path(s, "observations", base, c.faces.observations);
    }
    if (j.contains("train")) {
      const auto& s = j["train"];
      check_keys(s, "train", {"embeddings", "labels", "grid_search", "c_grid", "gamma_scales", "c", "gamma_scale"});
      get_path(s, "embeddings", base, c.train.embeddings);
      get_path(s, "labels", base, c.train.labels);
      get(s, "grid_search", c.train.grid_search);
      get(s, "c_grid", c.train.c_grid);
      get(s, "gamma_scales", c.train.gamma_scales);
      get(s, "c", c.train.c);
      get(s, "gamma_scale", c.train.gamma_scale);
    }
    if (j.contains("models")) {
      const auto& s = j["models"];
      check_keys(s, "models", {"a", "b"});
      get_path(s, "a", base, c.models.a);
      get_path(s, "b", base, c.models.b);
    }
    if (j.contains("classify")) {
      const auto& s = j["classify"];
      check_keys(s, "classify", {"merge_mode", "predictions"});
      if (s.contains("merge_mode"))
        c.classify.merge_mode = svm::merge_mode_from_string(s["merge_mode"].get<std::string>());
      get_path(s, "predictions", base, c.classify.predictions);
    }
    if (j.contains("annotate")) {
      const auto& s = j["annotate"];
      check_keys(s, "annotate", {"tasks", "provider", "chunk_limit", "timestamp", "parallelism", "annotations"});
      get(s, "tasks", c.annotate.tasks);
      get(s, "chunk_limit", c.annotate.chunk_limit);
      get(s, "timestamp", c.annotate.timestamp);
      get(s, "parallelism", c.annotate.parallelism);
      get_path(s, "annotations", base, c.annotate.annotations);
      if (s.contains("provider")) {
        const auto& p = s["provider"];
        check_keys(p, "annotate.provider", {"name", "seed", "stub_table", "http"});
        get(p, "name", c.annotate.provider.name);
        get(p, "seed", c.annotate.provider.seed);
        if (p.contains("stub_table") && !p["stub_table"].is_null())
          c.annotate.provider.stub_table = path_str(resolve(base, p["stub_table"].get<std::string>()));
        if (p.contains("http")) {
          const auto& h = p["http"];
          check_keys(h, "annotate.provider.http",
                     {"id", "url", "model", "api_key_env", "rate", "max_attempts", "timeout_ms", "base_delay_ms"});
          auto& hc = c.annotate.provider.http;
          get(h, "id", hc.id);
          get(h, "url", hc.url);
          get(h, "model", hc.model);
          get(h, "api_key_env", hc.api_key_env);
          get(h, "rate", hc.rate_per_second);
          get(h, "max_attempts", hc.retry.max_attempts);
          if (h.contains("timeout_ms")) hc.retry.timeout = std::chrono::milliseconds(h["timeout_ms"].get<long>());
          if (h.contains("base_delay_ms"))
            hc.retry.base_delay = std::chrono::milliseconds(h["base_delay_ms"].get<long>());
        }
      }
    }
    if (j.contains("validate")) {
      const auto& s = j["validate"];
      check_keys(s, "validate", {"ratings"});
      get_path(s, "ratings", base, c.validate.ratings);
    }
    if (j.contains("stats")) {
      const auto& s = j["stats"];
      check_keys(s, "stats", {"chi2_mode", "pooled", "vp_unspecified", "min_race_conf"});
      if (s.contains("chi2_mode")) c.stats.options.chi2_mode = report::chi2_mode_from_string(s["chi2_mode"].get<std::string>());
      get(s, "pooled", c.stats.options.pooled_variance);
      get(s, "vp_unspecified", c.stats.options.vp_unspecified);
      if (s.contains("min_race_conf") && !s["min_race_conf"].is_null())
        c.stats.min_race_confidence = s["min_race_conf"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigurationError(fmt::format("config {}: {}", path.string(), e.what()));
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

json to_json(const RunConfig& c) {
  json sources = json::array();
  for (const auto& s : c.ingest.sources) sources.push_back({{"venue", venue_key(s.venue)}, {"sections", s.sections}});
  json ingest = {{"sources", sources},
                 {"fixtures", path_str(c.ingest.fixtures)},
                 {"denylists", path_str(c.ingest.denylists)},
                 {"archive_host", c.ingest.archive_host},
                 {"rate", c.ingest.rate_per_second},
                 {"parallelism", c.ingest.parallelism},
                 {"max_attempts", c.ingest.max_attempts}};
  if (c.ingest.range) {
    ingest["from"] = c.ingest.range->first.iso();
    ingest["to"] = c.ingest.range->last.iso();
  }
  const auto& h = c.annotate.provider.http;
  json provider = {{"name", c.annotate.provider.name},
                   {"seed", c.annotate.provider.seed},
                   {"stub_table", c.annotate.provider.stub_table},
                   {"http",
                    {{"id", h.id},
                     {"url", h.url},
                     {"model", h.model},
                     {"api_key_env", h.api_key_env},
                     {"rate", h.rate_per_second},
                     {"max_attempts", h.retry.max_attempts},
                     {"timeout_ms", h.retry.timeout.count()},
                     {"base_delay_ms", h.retry.base_delay.count()}}}};
  json stats = {{"chi2_mode", c.stats.options.chi2_mode == stats::Chi2Mode::Full ? "full" : "group-vs-rest"},
                {"pooled", c.stats.options.pooled_variance},
                {"vp_unspecified", c.stats.options.vp_unspecified},
                {"min_race_conf", c.stats.min_race_confidence ? json(*c.stats.min_race_confidence) : json(nullptr)}};
  return {{"out", path_str(c.out)},
          {"seed", c.seed},
          {"threads", c.threads},
          {"corpus", path_str(c.corpus)},
          {"ingest", ingest},
          {"faces",
           {{"embeddings", path_str(c.faces.embeddings)},
            {"min_confidence", c.faces.min_confidence},
            {"area_mode", std::string(face::to_string(c.faces.area_mode))},
            {"observations", path_str(c.faces.observations)}}},
          {"train",
           {{"embeddings", path_str(c.train.embeddings)},
            {"labels", path_str(c.train.labels)},
            {"grid_search", c.train.grid_search},
            {"c_grid", c.train.c_grid},
            {"gamma_scales", c.train.gamma_scales},
            {"c", c.train.c},
            {"gamma_scale", c.train.gamma_scale}}},
          {"models", {{"a", path_str(c.models.a)}, {"b", path_str(c.models.b)}}},
          {"classify",
           {{"merge_mode", c.classify.merge_mode == svm::MergeMode::Label ? "label" : "probs"},
            {"predictions", path_str(c.classify.predictions)}}},
          {"annotate",
           {{"tasks", c.annotate.tasks},
            {"provider", provider},
            {"chunk_limit", c.annotate.chunk_limit},
            {"timestamp", c.annotate.timestamp},
            {"parallelism", c.annotate.parallelism},
            {"annotations", path_str(c.annotate.annotations)}}},
          {"validate", {{"ratings", path_str(c.validate.ratings)}}},
          {"stats", stats}};
}

}  // namespace biaskit::pipeline
