#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "biaskit/core/error.hpp"
#include "biaskit/core/log.hpp"
#include "biaskit/pipeline/pipeline.hpp"
#include "biaskit/report/report.hpp"
#include "biaskit/synth/synth.hpp"

namespace fs = std::filesystem;
using namespace biaskit;

namespace {

struct Flags {
  std::string config;
  std::string log_level = "info";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> corpus;
  std::optional<std::string> from, to, fixtures;
  std::optional<std::string> embeddings;
  std::optional<double> min_confidence;
  std::optional<std::string> area_mode;
  std::optional<std::string> train_embeddings, train_labels;
  bool no_grid_search = false;
  std::optional<std::string> model_a, model_b;
  std::optional<std::string> merge_mode;
  std::optional<std::string> tasks, provider, stub_table;
  std::optional<std::size_t> chunk_limit;
  std::optional<std::string> ratings;
  std::optional<std::string> chi2_mode;
  bool pooled = false;
  bool vp_unspecified = false;
  std::optional<double> min_race_conf;
  std::string stages = "all";
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "Run config JSON");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--threads", f.threads, "Worker threads (0: all cores)");
  app.add_option("--corpus", f.corpus, "Corpus store root");
  app.add_option("--log-level", f.log_level, "debug | info | warn | error");
}

void add_ingest(CLI::App& app, Flags& f) {
  app.add_option("--from", f.from, "First day, YYYY-MM-DD");
  app.add_option("--to", f.to, "Last day, YYYY-MM-DD");
  app.add_option("--fixtures", f.fixtures, "Serve archive requests from a fixture directory");
}

void add_faces(CLI::App& app, Flags& f) {
  app.add_option("--embeddings", f.embeddings, "Extractor output prefix");
  app.add_option("--min-confidence", f.min_confidence, "Detection confidence threshold");
  app.add_option("--area-mode", f.area_mode, "image | face-bbox");
}

void add_train(CLI::App& app, Flags& f) {
  app.add_option("--train-embeddings", f.train_embeddings, "Training embedding prefix");
  app.add_option("--train-labels", f.train_labels, "Training labels JSONL");
  app.add_flag("--no-grid-search", f.no_grid_search, "Use train.c and train.gamma_scale directly");
}

void add_classify(CLI::App& app, Flags& f) {
  app.add_option("--model-a", f.model_a, "2048-d model file");
  app.add_option("--model-b", f.model_b, "1024-d model file");
  app.add_option("--merge-mode", f.merge_mode, "label | probs");
}

void add_annotate(CLI::App& app, Flags& f) {
  app.add_option("--tasks", f.tasks, "emotion,sentiment,topic,race,vp");
  app.add_option("--provider", f.provider, "stub | http");
  app.add_option("--stub-table", f.stub_table, "Stub provider answer table");
  app.add_option("--chunk-limit", f.chunk_limit, "Characters per chunk (0: no chunking)");
}

void add_validate(CLI::App& app, Flags& f) { app.add_option("--ratings", f.ratings, "Human ratings JSONL"); }

void add_stats(CLI::App& app, Flags& f) {
  app.add_option("--chi2-mode", f.chi2_mode, "group-vs-rest | full");
  app.add_flag("--pooled", f.pooled, "Pooled-variance t-tests");
  app.add_flag("--vp-unspecified", f.vp_unspecified, "Keep unspecified roles in victim-perpetrator shares");
  app.add_option("--min-race-conf", f.min_race_conf, "Drop race mentions below this confidence");
}

log::Level parse_level(const std::string& s) {
  if (s == "debug") return log::Level::Debug;
  if (s == "info") return log::Level::Info;
  if (s == "warn") return log::Level::Warn;
  if (s == "error") return log::Level::Error;
  throw ConfigurationError(fmt::format("unknown log level '{}'", s));
}

fs::path abs(const std::string& p) { return fs::absolute(p).lexically_normal(); }

pipeline::RunConfig build_config(const Flags& f) {
  auto c = f.config.empty() ? pipeline::config_from_json(nlohmann::json::object(), fs::current_path())
                            : pipeline::load_config(f.config);
  if (f.out) c.out = abs(*f.out);
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.corpus) c.corpus = abs(*f.corpus);
  if (f.from || f.to) {
    if (!f.from || !f.to) throw ConfigurationError("--from and --to go together");
    c.ingest.range = DateRange{Date::parse(*f.from), Date::parse(*f.to)};
  }
  if (f.fixtures) c.ingest.fixtures = abs(*f.fixtures);
  if (f.embeddings) c.faces.embeddings = abs(*f.embeddings);
  if (f.min_confidence) c.faces.min_confidence = *f.min_confidence;
  if (f.area_mode) c.faces.area_mode = face::area_mode_from_string(*f.area_mode);
  if (f.train_embeddings) c.train.embeddings = abs(*f.train_embeddings);
  if (f.train_labels) c.train.labels = abs(*f.train_labels);
  if (f.no_grid_search) c.train.grid_search = false;
  if (f.model_a) c.models.a = abs(*f.model_a);
  if (f.model_b) c.models.b = abs(*f.model_b);
  if (f.merge_mode) c.classify.merge_mode = svm::merge_mode_from_string(*f.merge_mode);
  if (f.tasks) c.annotate.tasks = *f.tasks;
  if (f.provider) c.annotate.provider.name = *f.provider;
  if (f.stub_table) c.annotate.provider.stub_table = abs(*f.stub_table).string();
  if (f.chunk_limit) c.annotate.chunk_limit = *f.chunk_limit;
  if (f.ratings) c.validate.ratings = abs(*f.ratings);
  if (f.chi2_mode) c.stats.options.chi2_mode = report::chi2_mode_from_string(*f.chi2_mode);
  if (f.pooled) c.stats.options.pooled_variance = true;
  if (f.vp_unspecified) c.stats.options.vp_unspecified = true;
  if (f.min_race_conf) c.stats.min_race_confidence = *f.min_race_conf;
  return c;
}

void print_manifest(const pipeline::RunManifest& m) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : m.stages) stages.push_back({{"stage", s.stage}, {"counts", s.counts}});
  std::puts(nlohmann::json{{"config_hash", m.config_hash}, {"stages", stages}}.dump(2).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"News image and text bias analysis"};
  app.set_version_flag("--version", BIASKIT_VERSION);
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "Run several stages in order");
  add_common(*run, f);
  run->add_option("--stages", f.stages, "Comma separated stages or all");
  for (auto add : {add_ingest, add_faces, add_train, add_classify, add_annotate, add_validate, add_stats}) add(*run, f);

  std::map<CLI::App*, pipeline::Stage> stage_cmds;
  auto stage_cmd = [&](const char* name, const char* desc, pipeline::Stage s, auto... adders) {
    auto* cmd = app.add_subcommand(name, desc);
    add_common(*cmd, f);
    (adders(*cmd, f), ...);
    stage_cmds[cmd] = s;
    return cmd;
  };
  stage_cmd("ingest", "Collect archived articles and images into the corpus store", pipeline::Stage::Ingest,
            add_ingest);
  stage_cmd("faces", "Filter detections and attribute faces to articles", pipeline::Stage::Faces, add_faces);
  stage_cmd("train", "Train the two race classifiers", pipeline::Stage::Train, add_train)->alias("train-svm");
  stage_cmd("classify", "Classify filtered faces with the model ensemble", pipeline::Stage::Classify, add_classify);
  stage_cmd("annotate", "Annotate article text", pipeline::Stage::Annotate, add_annotate);
  stage_cmd("validate", "Score predictions against human ratings", pipeline::Stage::Validate, add_validate);
  stage_cmd("stats", "Compute all tables and emit the report", pipeline::Stage::Stats, add_stats);

  std::string report_stats, report_out;
  auto* rep = app.add_subcommand("report", "Emit CSV and JSON tables from a stats directory");
  rep->add_option("--stats", report_stats, "Stats directory")->required();
  rep->add_option("--out", report_out, "Report directory")->required();
  rep->add_option("--log-level", f.log_level, "debug | info | warn | error");

  std::string synth_out;
  synth::FixtureOptions synth_opts;
  auto* syn = app.add_subcommand("synth", "Write a synthetic input set and run config");
  syn->add_option("--out", synth_out, "Destination directory")->required();
  syn->add_option("--seed", synth_opts.seed, "Generator seed");
  syn->add_option("--articles", synth_opts.articles, "Number of articles");
  syn->add_option("--train-per-class", synth_opts.train_per_class, "Training faces per class");
  syn->add_option("--log-level", f.log_level, "debug | info | warn | error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    log::set_level(parse_level(f.log_level));
    if (rep->parsed()) {
      const auto entries = report::emit_report(report_stats, report_out);
      std::printf("%zu tables\n", entries.size());
      return 0;
    }
    if (syn->parsed()) {
      const auto paths = synth::write_pipeline_fixture(synth_out, synth_opts);
      std::printf("%s\n", paths.config.string().c_str());
      return 0;
    }
    std::vector<pipeline::Stage> stages;
    if (run->parsed()) {
      stages = pipeline::parse_stages(f.stages);
    } else {
      for (const auto& [cmd, s] : stage_cmds)
        if (cmd->parsed()) stages = {s};
    }
    print_manifest(pipeline::run_pipeline(build_config(f), stages));
    return 0;
  } catch (const ValidationError& e) {
    log::emit(log::Level::Error, "validation_error", {{"error", e.what()}});
    return 2;
  } catch (const pipeline::StageDependencyError& e) {
    log::emit(log::Level::Error, "stage_dependency_error", {{"error", e.what()}, {"artifact", e.artifact()}});
    return 3;
  } catch (const std::exception& e) {
    log::emit(log::Level::Error, "error", {{"error", e.what()}});
    return 1;
  }
}
