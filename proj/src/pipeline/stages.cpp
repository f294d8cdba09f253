#include "biaskit/pipeline/stages.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

#include "biaskit/annotate/annotate.hpp"
#include "biaskit/annotate/provider.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/log.hpp"
#include "biaskit/core/parallel.hpp"
#include "biaskit/face/embedding_io.hpp"

namespace biaskit::pipeline {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<json> read_jsonl(const fs::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open {} {}", what, path.string()));
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  write_file_atomic(path, out);
}

template <Labeled E>
json opt_label(const std::optional<E>& v) {
  return v ? json(std::string(to_string(*v))) : json(nullptr);
}

template <Labeled E>
std::optional<E> label_or_null(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return label_from_string<E>(j[key].get<std::string>());
}

struct Placement {
  Venue venue;
  Category category;
  int year;
  std::string article_id;
  int width = 0;
  int height = 0;
};

}  // namespace

FacesResult join_faces(const std::vector<ingest::ArticleRecord>& corpus, std::vector<face::FaceRecord> detected,
                       double min_confidence, face::AreaMode mode) {
  // first article per (image, venue) in corpus order
  std::map<std::string, std::map<Venue, Placement>> placements;
  for (const auto& a : corpus)
    for (const auto& img : a.image_refs)
      placements[img.image_id].try_emplace(
          a.venue, Placement{a.venue, a.category, a.publish_date.year(), a.article_id, img.width_px, img.height_px});

  FacesResult out;
  out.detected = detected.size();
  for (auto& r : detected) {
    if (r.detection.confidence <= min_confidence) continue;
    face::validate(r);
    out.kept.push_back(std::move(r));
  }
  out.filtered = out.kept.size();

  std::map<Venue, std::vector<std::int64_t>> areas;
  std::vector<std::optional<std::size_t>> area_slot;
  for (const auto& r : out.kept) {
    const auto it = placements.find(r.image_id());
    if (it == placements.end()) {
      ++out.unattributed;
      log::debug("face_unattributed", {{"face_id", r.face_id}, {"image_id", r.image_id()}});
      continue;
    }
    for (const auto& [venue, p] : it->second) {
      FaceObservationRecord rec;
      rec.obs.face_id = r.face_id;
      rec.obs.image_id = r.image_id();
      rec.obs.venue = venue;
      rec.obs.category = p.category;
      rec.obs.year = p.year;
      rec.obs.gender = r.gender_pred;
      if (r.age_probs) rec.obs.age = svm::age_bracket(*r.age_probs);
      rec.article_id = p.article_id;
      try {
        if (mode == face::AreaMode::Image) {
          const auto w = r.image_width_px > 0 ? r.image_width_px : std::int64_t(p.width);
          const auto h = r.image_height_px > 0 ? r.image_height_px : std::int64_t(p.height);
          rec.area_px2 = face::image_area(w, h);
        } else {
          rec.area_px2 = face::face_bbox_area(r.detection);
        }
      } catch (const face::AreaUnavailable&) {
      }
      if (rec.area_px2) {
        area_slot.push_back(areas[venue].size());
        areas[venue].push_back(*rec.area_px2);
      } else {
        area_slot.push_back(std::nullopt);
      }
      out.observations.push_back(std::move(rec));
    }
  }
  std::map<Venue, face::VenueZScores> z;
  std::map<Venue, std::vector<std::int64_t>> present;
  for (auto& [venue, list] : areas)
    if (!list.empty()) present[venue] = list;
  if (!present.empty()) z = face::zscore_by_venue(present);
  for (std::size_t i = 0; i < out.observations.size(); ++i) {
    auto& rec = out.observations[i];
    if (!area_slot[i]) continue;
    const auto& vz = z[rec.obs.venue];
    if (vz.defined) rec.obs.area_z = vz.z[*area_slot[i]];
  }
  for (const auto& [venue, vz] : z)
    if (!vz.defined) log::warn("area_z_undefined", {{"venue", std::string(to_string(venue))}});
  return out;
}

void write_observations(const fs::path& path, const std::vector<FaceObservationRecord>& records) {
  std::vector<json> rows;
  for (const auto& r : records) {
    const auto& o = r.obs;
    rows.push_back({{"face_id", o.face_id},
                    {"image_id", o.image_id},
                    {"article_id", r.article_id},
                    {"venue", std::string(to_string(o.venue))},
                    {"category", std::string(to_string(o.category))},
                    {"year", o.year},
                    {"area_px2", r.area_px2 ? json(*r.area_px2) : json(nullptr)},
                    {"area_z", o.area_z ? json(*o.area_z) : json(nullptr)},
                    {"gender", opt_label(o.gender)},
                    {"age", opt_label(o.age)}});
  }
  write_jsonl(path, rows);
}

std::vector<FaceObservationRecord> read_observations(const fs::path& path) {
  std::vector<FaceObservationRecord> out;
  for (const auto& j : read_jsonl(path, "face observations")) {
    try {
      FaceObservationRecord r;
      r.obs.face_id = j.at("face_id").get<std::string>();
      r.obs.image_id = j.at("image_id").get<std::string>();
      r.article_id = j.at("article_id").get<std::string>();
      r.obs.venue = label_from_string<Venue>(j.at("venue").get<std::string>());
      r.obs.category = label_from_string<Category>(j.at("category").get<std::string>());
      r.obs.year = j.at("year").get<int>();
      if (!j.at("area_px2").is_null()) r.area_px2 = j["area_px2"].get<std::int64_t>();
      if (!j.at("area_z").is_null()) r.obs.area_z = j["area_z"].get<double>();
      r.obs.gender = label_or_null<Gender>(j, "gender");
      r.obs.age = label_or_null<AgeBracket>(j, "age");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return out;
}

TrainingSet load_training_set(const fs::path& embeddings_prefix, const fs::path& labels) {
  std::map<std::string, Race7> by_face;
  for (const auto& j : read_jsonl(labels, "training labels")) {
    try {
      const auto id = j.at("face_id").get<std::string>();
      if (!by_face.emplace(id, label_from_string<Race7>(j.at("race").get<std::string>())).second)
        throw InvalidInput(fmt::format("{}: duplicate label for face {}", labels.string(), id));
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}: {}", labels.string(), e.what()));
    }
  }
  TrainingSet set;
  for (const auto& r : face::read_embeddings(face::embedding_paths(embeddings_prefix))) {
    const auto it = by_face.find(r.face_id);
    if (it == by_face.end()) throw InvalidInput(fmt::format("training face {} has no label", r.face_id));
    set.a.push_row(r.emb_a);
    set.b.push_row(r.emb_b);
    set.labels.push_back(index_of(it->second));
  }
  if (set.labels.empty()) throw InvalidInput("training set is empty");
  return set;
}

TrainedSpace train_space(const svm::FeatureMatrix& x, const std::vector<std::size_t>& labels,
                         const TrainSettings& settings, std::uint64_t seed, unsigned threads) {
  const auto order = svm::race7_label_order();
  const double base_gamma = 1.0 / double(x.cols);
  TrainedSpace out;
  out.c = settings.c;
  out.gamma = settings.gamma_scale * base_gamma;
  if (settings.grid_search) {
    const auto grid = svm::grid_search(x, labels, order, settings.c_grid, settings.gamma_scales, seed, 0.2, threads);
    const auto& best = grid.points[grid.best];
    out.c = best.c;
    out.gamma = best.gamma;
    out.validation_accuracy = best.validation_accuracy;
  }
  svm::TrainParams params;
  params.c = out.c;
  params.gamma = out.gamma;
  params.seed = seed;
  params.threads = threads;
  out.model = svm::train_svm(x, labels, order, params);
  return out;
}

std::vector<Prediction> classify_all(const std::vector<face::FaceRecord>& faces, const svm::SvmEnsemble& ensemble,
                                     unsigned threads) {
  svm::check_ensemble(ensemble);
  std::vector<Prediction> out(faces.size());
  parallel_for(faces.size(), threads, [&](std::size_t i) {
    const auto c = svm::classify_face(faces[i], ensemble);
    out[i] = Prediction{faces[i].face_id, c.race, c.confidence, c.probs7};
  });
  return out;
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& predictions) {
  std::vector<json> rows;
  for (const auto& p : predictions)
    rows.push_back({{"face_id", p.face_id},
                    {"race", std::string(to_string(p.race))},
                    {"confidence", p.confidence},
                    {"probs7", p.probs7}});
  write_jsonl(path, rows);
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::vector<Prediction> out;
  for (const auto& j : read_jsonl(path, "predictions")) {
    try {
      out.push_back(Prediction{j.at("face_id").get<std::string>(),
                               label_from_string<Race6>(j.at("race").get<std::string>()),
                               j.at("confidence").get<double>(), j.value("probs7", std::vector<double>{})});
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return out;
}

std::vector<annotate::AnnotationRecord> annotate_corpus(const std::vector<ingest::ArticleRecord>& corpus,
                                                        const AnnotateSettings& settings, const fs::path& cache_path) {
  const auto tasks = annotate::parse_tasks(settings.tasks);
  auto provider = annotate::make_provider(settings.provider);
  annotate::AnnotationCache cache(cache_path);
  std::vector<annotate::ArticleText> texts;
  texts.reserve(corpus.size());
  for (const auto& a : corpus) texts.push_back({a.article_id, a.body});
  annotate::AnnotateOptions options;
  options.chunk_limit = settings.chunk_limit;
  options.timestamp = settings.timestamp;
  return annotate::annotate_all(texts, tasks, *provider, cache, options, settings.parallelism);
}

std::vector<RatedItem> read_ratings(const fs::path& path) {
  static const std::set<std::string> kTasks{"race",      "gender",   "age",    "emotion",
                                            "sentiment", "category", "victim", "perpetrator"};
  std::vector<RatedItem> out;
  for (const auto& j : read_jsonl(path, "ratings")) {
    try {
      RatedItem item;
      item.task = j.at("task").get<std::string>();
      if (!kTasks.count(item.task)) throw InvalidInput(fmt::format("{}: unknown validation task '{}'", path.string(), item.task));
      item.item_id = j.at("item_id").get<std::string>();
      for (const auto& r : j.at("ratings"))
        item.ratings.push_back(r.is_null() ? std::nullopt : std::optional<std::string>(r.get<std::string>()));
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return out;
}

bool is_face_task(const std::string& task) { return task == "race" || task == "gender" || task == "age"; }

PredictionIndex face_prediction_index(const std::vector<Prediction>& predictions,
                                      const std::vector<FaceObservationRecord>& observations) {
  PredictionIndex idx;
  for (const auto& p : predictions) idx["race"][p.face_id] = std::string(to_string(p.race));
  for (const auto& r : observations) {
    if (r.obs.gender) idx["gender"].try_emplace(r.obs.face_id, std::string(to_string(*r.obs.gender)));
    if (r.obs.age) idx["age"].try_emplace(r.obs.face_id, std::string(to_string(*r.obs.age)));
  }
  return idx;
}

PredictionIndex text_prediction_index(const std::vector<annotate::AnnotationRecord>& annotations) {
  PredictionIndex idx;
  for (const auto& a : annotations) {
    if (a.emotion) idx["emotion"][a.article_id] = std::string(to_string(*a.emotion));
    if (a.sentiment) idx["sentiment"][a.article_id] = std::string(to_string(*a.sentiment));
    if (a.topic) idx["category"][a.article_id] = std::string(to_string(*a.topic));
    if (a.vp) {
      idx["victim"][a.article_id] = annotate::victim_answer(a.vp->victim);
      idx["perpetrator"][a.article_id] = annotate::perpetrator_answer(a.vp->perpetrator);
    }
  }
  return idx;
}

std::vector<report::ValidationRow> validate_ratings(const std::vector<RatedItem>& items, const PredictionIndex& preds) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<std::vector<std::optional<std::string>>>,
                                  std::vector<std::optional<std::string>>>>
      by_task;
  for (const auto& item : items) {
    auto [it, inserted] = by_task.try_emplace(item.task);
    if (inserted) order.push_back(item.task);
    it->second.first.push_back(item.ratings);
    std::optional<std::string> pred;
    if (auto t = preds.find(item.task); t != preds.end())
      if (auto p = t->second.find(item.item_id); p != t->second.end()) pred = p->second;
    it->second.second.push_back(pred);
  }
  std::vector<report::ValidationRow> out;
  for (const auto& task : order) {
    const auto& [ratings, task_preds] = by_task.at(task);
    out.push_back(report::validate_task(task, ratings, task_preds));
  }
  return out;
}

std::vector<stats::TextObservation> join_text(const std::vector<ingest::ArticleRecord>& corpus,
                                              std::vector<annotate::AnnotationRecord> annotations,
                                              std::optional<double> min_race_confidence) {
  if (min_race_confidence) annotate::apply_min_race_confidence(annotations, *min_race_confidence);
  std::map<std::string, const ingest::ArticleRecord*> by_id;
  for (const auto& a : corpus) by_id.emplace(a.article_id, &a);
  std::vector<stats::TextObservation> out;
  out.reserve(annotations.size());
  for (const auto& r : annotations) {
    const auto it = by_id.find(r.article_id);
    if (it == by_id.end()) throw InvalidInput(fmt::format("annotation for unknown article {}", r.article_id));
    stats::TextObservation o;
    o.article_id = r.article_id;
    o.venue = it->second->venue;
    o.category = it->second->category;
    o.year = it->second->publish_date.year();
    o.emotion = r.emotion;
    o.sentiment = r.sentiment;
    o.topic = r.topic;
    o.race = r.race;
    o.vp = r.vp;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<stats::FaceObservation> join_face_predictions(const std::vector<FaceObservationRecord>& observations,
                                                          const std::vector<Prediction>& predictions) {
  std::map<std::string, Race6> race;
  for (const auto& p : predictions) race.emplace(p.face_id, p.race);
  std::vector<stats::FaceObservation> out;
  out.reserve(observations.size());
  for (const auto& r : observations) {
    auto o = r.obs;
    if (auto it = race.find(o.face_id); it != race.end()) o.race = it->second;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace biaskit::pipeline
