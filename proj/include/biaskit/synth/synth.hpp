#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "biaskit/annotate/types.hpp"
#include "biaskit/core/labels.hpp"
#include "biaskit/stats/aggregate.hpp"

namespace biaskit::synth {

template <Labeled E>
using Dist = std::array<double, label_count<E>()>;

using VpDist = std::array<double, annotate::kVpRoleCount>;

// Generative proportions behind the synthetic corpora. Every distribution
// is normalized.
class PlantedModel {
 public:
  Dist<Race6> face_race(Venue v, Category c) const;
  double face_male(Venue v, Category c) const;
  Dist<AgeBracket> face_age(Venue v) const;

  double mention_rate() const { return 0.8; }
  Dist<Race6> mention_race(Venue v, int year) const;
  Dist<Emotion> emotion(Venue v, Race6 r) const;
  double positive(Venue v, Race6 r) const;
  Dist<Topic> topic(Venue v, Race6 r) const;
  Dist<Topic> topic_without_race() const;
  VpDist victim(Venue v) const;
  VpDist perpetrator(Venue v, annotate::VpRole victim) const;

  // Values the estimators should recover.
  double emotion_share(Venue v, Race6 r, Emotion e) const;  // among non-neutral
  double sentiment_balance(Venue v, Race6 r, std::optional<int> year) const;
  double topic_race_share(Venue v, Topic t, Race6 r) const;  // years pooled
  double topic_race_share(Venue v, Topic t, Race6 r, int year) const;
  double race_topic_share(Venue v, Race6 r, Topic t) const;  // years pooled
  double vp_share(Venue v, Race6 victim, Race6 perp) const;  // among race perpetrators
  double mean_age(Venue v) const;
  double mean_age_sd(Venue v) const;
};

struct BiasCorpus {
  std::vector<stats::TextObservation> text;
  std::vector<stats::FaceObservation> faces;
};

// Categories and years are uniform; area_z is left unset.
BiasCorpus generate_bias_corpus(const PlantedModel& model, std::size_t text_records, std::size_t face_records,
                                std::uint64_t seed);

struct FixtureOptions {
  std::uint64_t seed = 7;
  std::size_t articles = 360;
  std::size_t images_per_article = 1;
  std::size_t train_per_class = 24;
  double low_confidence_rate = 0.1;
  double blob_separation = 12.0;
  std::size_t rated_items = 40;  // per validation task
};

// Paths written by write_pipeline_fixture, relative to its root.
struct FixturePaths {
  std::filesystem::path root;
  std::filesystem::path corpus;      // corpus store root
  std::filesystem::path faces;       // embedding prefix of detected faces
  std::filesystem::path train;       // embedding prefix of labelled training faces
  std::filesystem::path train_labels;
  std::filesystem::path stub_table;
  std::filesystem::path ratings;
  std::filesystem::path config;      // run config using all of the above
};

// Writes a complete pipeline input set: a corpus store, detected face
// embeddings for its images, a labelled training set, a stub annotator
// answer table carrying planted labels, rater labels for validation, and a
// run config. Identical options give byte-identical files.
FixturePaths write_pipeline_fixture(const std::filesystem::path& root, const FixtureOptions& options = {});

}  // namespace biaskit::synth
