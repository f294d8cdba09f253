#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "biaskit/annotate/types.hpp"
#include "biaskit/core/error.hpp"
#include "biaskit/face/face.hpp"
#include "biaskit/ingest/corpus.hpp"
#include "biaskit/pipeline/config.hpp"
#include "biaskit/report/report.hpp"
#include "biaskit/stats/aggregate.hpp"
#include "biaskit/svm/ensemble.hpp"

namespace biaskit::pipeline {

class StageDependencyError : public Error {
 public:
  StageDependencyError(const std::string& stage, const std::string& artifact)
      : Error("stage " + stage + " requires " + artifact), artifact_(artifact) {}
  const std::string& artifact() const { return artifact_; }

 private:
  std::string artifact_;
};

// ---- faces ----

// One face as seen by one venue. A face whose image appears in articles of
// both venues yields one observation per venue, taking category and year
// from that venue's first article in corpus order.
struct FaceObservationRecord {
  stats::FaceObservation obs;
  std::string article_id;
  std::optional<std::int64_t> area_px2;
};

struct FacesResult {
  std::size_t detected = 0;
  std::size_t filtered = 0;
  std::size_t unattributed = 0;  // kept faces whose image is in no article
  std::vector<face::FaceRecord> kept;
  std::vector<FaceObservationRecord> observations;
};

FacesResult join_faces(const std::vector<ingest::ArticleRecord>& corpus, std::vector<face::FaceRecord> detected,
                       double min_confidence, face::AreaMode mode);

void write_observations(const std::filesystem::path& path, const std::vector<FaceObservationRecord>& records);
std::vector<FaceObservationRecord> read_observations(const std::filesystem::path& path);

// ---- train ----

struct TrainingSet {
  svm::FeatureMatrix a{face::kEmbADim};
  svm::FeatureMatrix b{face::kEmbBDim};
  std::vector<std::size_t> labels;  // Race7 order
};

// labels: JSON lines {"face_id", "race"} with a Race7 label per face.
TrainingSet load_training_set(const std::filesystem::path& embeddings_prefix, const std::filesystem::path& labels);

struct TrainedSpace {
  svm::SvmModel model;
  double c = 0;
  double gamma = 0;
  std::optional<double> validation_accuracy;
};

TrainedSpace train_space(const svm::FeatureMatrix& x, const std::vector<std::size_t>& labels,
                         const TrainSettings& settings, std::uint64_t seed, unsigned threads);

// ---- classify ----

struct Prediction {
  std::string face_id;
  Race6 race = Race6::Asian;
  double confidence = 0;
  std::vector<double> probs7;
};

std::vector<Prediction> classify_all(const std::vector<face::FaceRecord>& faces, const svm::SvmEnsemble& ensemble,
                                     unsigned threads);

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& predictions);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// ---- annotate ----

std::vector<annotate::AnnotationRecord> annotate_corpus(const std::vector<ingest::ArticleRecord>& corpus,
                                                        const AnnotateSettings& settings,
                                                        const std::filesystem::path& cache_path);

// ---- validate ----

struct RatedItem {
  std::string task;
  std::string item_id;
  std::vector<std::optional<std::string>> ratings;
};

// JSON lines {"task", "item_id", "ratings": [label or null, ...]}. Tasks:
// race, gender, age, emotion, sentiment, category, victim, perpetrator.
std::vector<RatedItem> read_ratings(const std::filesystem::path& path);

bool is_face_task(const std::string& task);

// Model labels per task keyed by item id.
using PredictionIndex = std::map<std::string, std::map<std::string, std::string>>;

PredictionIndex face_prediction_index(const std::vector<Prediction>& predictions,
                                      const std::vector<FaceObservationRecord>& observations);
PredictionIndex text_prediction_index(const std::vector<annotate::AnnotationRecord>& annotations);

// Tasks in first-seen order.
std::vector<report::ValidationRow> validate_ratings(const std::vector<RatedItem>& items, const PredictionIndex& preds);

// ---- stats ----

std::vector<stats::TextObservation> join_text(const std::vector<ingest::ArticleRecord>& corpus,
                                              std::vector<annotate::AnnotationRecord> annotations,
                                              std::optional<double> min_race_confidence);

std::vector<stats::FaceObservation> join_face_predictions(const std::vector<FaceObservationRecord>& observations,
                                                          const std::vector<Prediction>& predictions);

}  // namespace biaskit::pipeline
