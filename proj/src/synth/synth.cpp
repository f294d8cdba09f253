#include "biaskit/synth/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "biaskit/annotate/prompt.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/hash.hpp"
#include "biaskit/core/rng.hpp"
#include "biaskit/face/embedding_io.hpp"
#include "biaskit/ingest/corpus.hpp"
#include "biaskit/ingest/url.hpp"

namespace biaskit::synth {

using annotate::VpRole;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <std::size_t N>
std::array<double, N> normalized(std::array<double, N> w) {
  double total = 0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

constexpr std::size_t kYears = stats::kLastYear - stats::kFirstYear + 1;

std::size_t vi(Venue v) { return index_of(v); }
std::size_t ri(Race6 r) { return index_of(r); }

Topic signature_topic(Race6 r) {
  switch (r) {
    case Race6::Asian: return Topic::Technology;
    case Race6::Black: return Topic::Sport;
    case Race6::Indian: return Topic::Economics;
    case Race6::Latinx: return Topic::Immigration;
    case Race6::MiddleEastern: return Topic::Terrorism;
    case Race6::White: return Topic::Politics;
  }
  return Topic::Politics;
}

Topic secondary_topic(Race6 r) {
  switch (r) {
    case Race6::Asian: return Topic::Inventions;
    case Race6::Black: return Topic::Violence;
    case Race6::Indian: return Topic::Technology;
    case Race6::Latinx: return Topic::Poverty;
    case Race6::MiddleEastern: return Topic::War;
    case Race6::White: return Topic::Economics;
  }
  return Topic::Economics;
}

}  // namespace

Dist<Race6> PlantedModel::face_race(Venue v, Category c) const {
  Dist<Race6> w = v == Venue::NYT ? Dist<Race6>{0.10, 0.15, 0.05, 0.08, 0.07, 0.55}
                                  : Dist<Race6>{0.06, 0.12, 0.03, 0.06, 0.05, 0.68};
  w[ri(Race6::White)] *= 1.0 + 0.06 * (double(index_of(c)) - 4.5) / 4.5;
  if (c == Category::Sport) w[ri(Race6::Black)] *= 1.8;
  if (c == Category::World) w[ri(Race6::MiddleEastern)] *= 2.0;
  return normalized(w);
}

double PlantedModel::face_male(Venue v, Category c) const {
  double p = v == Venue::NYT ? 0.58 : 0.64;
  if (c == Category::Sport) p += 0.25;
  if (c == Category::Art) p -= 0.08;
  if (c == Category::Politics) p += 0.10;
  return p;
}

Dist<AgeBracket> PlantedModel::face_age(Venue v) const {
  return v == Venue::NYT ? normalized(Dist<AgeBracket>{0.04, 0.08, 0.45, 0.30, 0.13})
                         : normalized(Dist<AgeBracket>{0.03, 0.06, 0.42, 0.33, 0.16});
}

Dist<Race6> PlantedModel::mention_race(Venue v, int year) const {
  Dist<Race6> w = v == Venue::NYT ? Dist<Race6>{0.12, 0.20, 0.06, 0.10, 0.12, 0.40}
                                  : Dist<Race6>{0.08, 0.18, 0.04, 0.12, 0.16, 0.42};
  w[ri(Race6::MiddleEastern)] *= 1.0 + double(year - stats::kFirstYear) / 10.0;
  return normalized(w);
}

Dist<Emotion> PlantedModel::emotion(Venue v, Race6 r) const {
  Dist<Emotion> w{0.40, 0.05, 0.12, 0.15, 0.10, 0.12, 0.06};
  for (std::size_t e = 1; e < w.size(); ++e)
    w[e] *= 1.0 + 0.35 * std::sin(1.3 * double(ri(r)) + 0.7 * double(e) + 2.1 * double(vi(v)));
  return normalized(w);
}

double PlantedModel::positive(Venue v, Race6 r) const {
  return 0.5 + (v == Venue::NYT ? 0.04 : 0.10) * std::sin(1.7 * double(ri(r)) + 0.5);
}

Dist<Topic> PlantedModel::topic(Venue v, Race6 r) const {
  Dist<Topic> w;
  w.fill(1.0);
  w[index_of(signature_topic(r))] = 10.0 + 4.0 * double(vi(v));
  w[index_of(secondary_topic(r))] = 3.0;
  return normalized(w);
}

Dist<Topic> PlantedModel::topic_without_race() const {
  Dist<Topic> w;
  w.fill(1.0);
  return normalized(w);
}

VpDist PlantedModel::victim(Venue v) const {
  VpDist w{0.06, 0.16, 0.03, 0.08, 0.09, 0.22, 0.16, 0.20};
  if (v == Venue::FOX) {
    w[std::size_t(VpRole::Black)] = 0.19;
    w[std::size_t(VpRole::White)] = 0.19;
  }
  return normalized(w);
}

VpDist PlantedModel::perpetrator(Venue v, VpRole victim) const {
  VpDist w{0.04, 0.14, 0.02, 0.08, 0.10, 0.30, 0.17, 0.15};
  if (annotate::as_race(victim)) w[std::size_t(victim)] *= 1.6;
  if (v == Venue::NYT && victim == VpRole::Black) w[std::size_t(VpRole::White)] *= 2.0;
  if (v == Venue::FOX && victim == VpRole::White) w[std::size_t(VpRole::MiddleEastern)] *= 2.0;
  if (victim == VpRole::Absent) w[std::size_t(VpRole::Absent)] *= 3.0;
  return normalized(w);
}

double PlantedModel::emotion_share(Venue v, Race6 r, Emotion e) const {
  if (e == Emotion::Neutral) return 0.0;
  const auto w = emotion(v, r);
  return w[index_of(e)] / (1.0 - w[index_of(Emotion::Neutral)]);
}

double PlantedModel::sentiment_balance(Venue v, Race6 r, std::optional<int>) const {
  return 100.0 * (2.0 * positive(v, r) - 1.0);
}

double PlantedModel::topic_race_share(Venue v, Topic t, Race6 r, int year) const {
  const auto m = mention_race(v, year);
  double total = 0;
  for (Race6 q : all_labels<Race6>()) total += m[ri(q)] * topic(v, q)[index_of(t)];
  return m[ri(r)] * topic(v, r)[index_of(t)] / total;
}

double PlantedModel::topic_race_share(Venue v, Topic t, Race6 r) const {
  double hit = 0, total = 0;
  for (int y = stats::kFirstYear; y <= stats::kLastYear; ++y) {
    const auto m = mention_race(v, y);
    for (Race6 q : all_labels<Race6>()) {
      const double p = m[ri(q)] * topic(v, q)[index_of(t)];
      total += p;
      if (q == r) hit += p;
    }
  }
  return hit / total;
}

double PlantedModel::race_topic_share(Venue v, Race6 r, Topic t) const { return topic(v, r)[index_of(t)]; }

double PlantedModel::vp_share(Venue v, Race6 victim, Race6 perp) const {
  const auto w = perpetrator(v, annotate::from_race(victim));
  double races = 0;
  for (Race6 q : all_labels<Race6>()) races += w[std::size_t(annotate::from_race(q))];
  return w[std::size_t(annotate::from_race(perp))] / races;
}

double PlantedModel::mean_age(Venue v) const {
  const auto p = face_age(v);
  double m = 0;
  for (std::size_t b = 0; b < p.size(); ++b) m += p[b] * kAgeMidpoints[b];
  return m;
}

double PlantedModel::mean_age_sd(Venue v) const {
  const auto p = face_age(v);
  const double mu = mean_age(v);
  double var = 0;
  for (std::size_t b = 0; b < p.size(); ++b) var += p[b] * (kAgeMidpoints[b] - mu) * (kAgeMidpoints[b] - mu);
  return std::sqrt(var);
}

namespace {

template <Labeled E>
E draw(Rng& rng, const Dist<E>& d) {
  return static_cast<E>(rng.categorical(d));
}

VpRole draw_role(Rng& rng, const VpDist& d) { return static_cast<VpRole>(rng.categorical(d)); }

struct TextTruth {
  std::optional<Race6> race;
  Emotion emotion = Emotion::Neutral;
  Sentiment sentiment = Sentiment::Positive;
  Topic topic = Topic::Animals;
  annotate::VictimPerpRecord vp;
};

TextTruth draw_text(Rng& rng, const PlantedModel& m, Venue v, int year) {
  TextTruth t;
  if (rng.uniform() < m.mention_rate()) t.race = draw<Race6>(rng, m.mention_race(v, year));
  const Race6 tone = t.race.value_or(Race6::White);
  t.emotion = draw<Emotion>(rng, m.emotion(v, tone));
  const double p_pos = t.race ? m.positive(v, *t.race) : 0.5;
  t.sentiment = rng.uniform() < p_pos ? Sentiment::Positive : Sentiment::Negative;
  t.topic = t.race ? draw<Topic>(rng, m.topic(v, *t.race)) : draw<Topic>(rng, m.topic_without_race());
  t.vp.victim = draw_role(rng, m.victim(v));
  t.vp.perpetrator = draw_role(rng, m.perpetrator(v, t.vp.victim));
  return t;
}

struct FaceTruth {
  Race6 race = Race6::White;
  Gender gender = Gender::Male;
  AgeBracket age = AgeBracket::A20_39;
};

FaceTruth draw_face(Rng& rng, const PlantedModel& m, Venue v, Category c) {
  FaceTruth f;
  f.race = draw<Race6>(rng, m.face_race(v, c));
  f.gender = rng.uniform() < m.face_male(v, c) ? Gender::Male : Gender::Female;
  f.age = draw<AgeBracket>(rng, m.face_age(v));
  return f;
}

}  // namespace

BiasCorpus generate_bias_corpus(const PlantedModel& model, std::size_t text_records, std::size_t face_records,
                                std::uint64_t seed) {
  Rng rng(seed);
  BiasCorpus out;
  out.text.reserve(text_records);
  for (std::size_t i = 0; i < text_records; ++i) {
    stats::TextObservation o;
    o.article_id = fmt::format("syn-t{:05}", i);
    o.venue = static_cast<Venue>(rng.below(2));
    o.category = static_cast<Category>(rng.below(label_count<Category>()));
    o.year = stats::kFirstYear + int(rng.below(kYears));
    const auto t = draw_text(rng, model, o.venue, o.year);
    o.race = t.race;
    o.emotion = t.emotion;
    o.sentiment = t.sentiment;
    o.topic = t.topic;
    o.vp = t.vp;
    out.text.push_back(std::move(o));
  }
  out.faces.reserve(face_records);
  for (std::size_t i = 0; i < face_records; ++i) {
    stats::FaceObservation o;
    o.face_id = fmt::format("syn-f{:05}", i);
    o.image_id = o.face_id;
    o.venue = static_cast<Venue>(rng.below(2));
    o.category = static_cast<Category>(rng.below(label_count<Category>()));
    o.year = stats::kFirstYear + int(rng.below(kYears));
    const auto f = draw_face(rng, model, o.venue, o.category);
    o.race = f.race;
    o.gender = f.gender;
    o.age = f.age;
    out.faces.push_back(std::move(o));
  }
  return out;
}

// ---- pipeline fixture ----

namespace {

const std::array<std::string_view, 24> kWords{
    "council", "market",  "river",   "season",  "budget", "harbor", "museum",  "festival",
    "clinic",  "school",  "airport", "village", "league", "energy", "housing", "election",
    "storm",   "factory", "court",   "bridge",  "garden", "concert", "border", "campus"};

std::string make_body(Rng& rng, std::size_t index) {
  std::string body;
  const std::size_t paragraphs = 2 + rng.below(3);
  for (std::size_t p = 0; p < paragraphs; ++p) {
    if (p > 0) body += "\n\n";
    if (p == 0) body += fmt::format("Dispatch {} from the desk.", index);
    const std::size_t sentences = 2 + rng.below(3);
    for (std::size_t s = 0; s < sentences; ++s) {
      if (!body.empty() && body.back() != '\n') body += ' ';
      std::string sentence;
      const std::size_t words = 5 + rng.below(6);
      for (std::size_t w = 0; w < words; ++w) {
        if (w > 0) sentence += ' ';
        sentence += kWords[rng.below(kWords.size())];
      }
      sentence[0] = char(std::toupper(static_cast<unsigned char>(sentence[0])));
      body += sentence + ".";
    }
  }
  return body;
}

std::string category_slug(Category c) { return fold_label(to_string(c)); }

std::string article_url(Venue v, const Date& d, Category c, std::size_t index) {
  if (v == Venue::NYT)
    return fmt::format("https://www.nytimes.com/{:04}/{:02}/{:02}/{}/dispatch-{}.html", d.year(), d.month(), d.day(),
                       category_slug(c), index);
  return fmt::format("https://www.foxnews.com/{}/dispatch-number-{}", category_slug(c), index);
}

Race7 split_race(Rng& rng, Race6 r) {
  switch (r) {
    case Race6::Asian: return rng.uniform() < 0.5 ? Race7::EastAsian : Race7::SoutheastAsian;
    case Race6::Black: return Race7::Black;
    case Race6::Indian: return Race7::Indian;
    case Race6::Latinx: return Race7::Latinx;
    case Race6::MiddleEastern: return Race7::MiddleEastern;
    case Race6::White: return Race7::White;
  }
  return Race7::White;
}

struct Centers {
  std::vector<std::vector<double>> a, b;
};

std::vector<std::vector<double>> make_centers(Rng& rng, std::size_t dim, double separation) {
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < label_count<Race7>(); ++c) {
    std::vector<double> v(dim);
    double norm = 0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x *= separation / norm;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<float> sample(Rng& rng, const std::vector<double>& center) {
  std::vector<float> v(center.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = float(center[i] + rng.normal());
  return v;
}

std::array<double, 5> age_probs_for(Rng& rng, AgeBracket truth) {
  std::array<double, 5> p{};
  // about one face in ten is assigned a neighbouring bracket
  std::size_t peak = index_of(truth);
  if (rng.uniform() < 0.1) peak = peak == 0 ? 1 : peak - 1;
  for (std::size_t b = 0; b < p.size(); ++b) p[b] = b == peak ? 0.6 : 0.1;
  return p;
}

std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

template <typename Label>
json rater_labels(Rng& rng, const std::string& truth, const std::vector<Label>& labels) {
  json out = json::array();
  for (int rater = 0; rater < 5; ++rater) {
    const double u = rng.uniform();
    if (u < 0.05) {
      out.push_back(nullptr);
    } else if (u < 0.85) {
      out.push_back(truth);
    } else {
      out.push_back(std::string(labels[rng.below(labels.size())]));
    }
  }
  return out;
}

template <Labeled E>
std::vector<std::string> names_of() {
  std::vector<std::string> out;
  for (E e : all_labels<E>()) out.emplace_back(to_string(e));
  return out;
}

std::vector<std::string> vp_names(bool victim) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < annotate::kVpRoleCount; ++i) {
    const auto role = static_cast<VpRole>(i);
    out.push_back(victim ? annotate::victim_answer(role) : annotate::perpetrator_answer(role));
  }
  return out;
}

}  // namespace

FixturePaths write_pipeline_fixture(const fs::path& root, const FixtureOptions& options) {
  const PlantedModel model;
  Rng rng(options.seed);
  FixturePaths paths;
  paths.root = root;
  paths.corpus = root / "corpus";
  paths.faces = root / "faces";
  paths.train = root / "train";
  paths.train_labels = root / "train_labels.jsonl";
  paths.stub_table = root / "stub_table.jsonl";
  paths.ratings = root / "ratings.jsonl";
  paths.config = root / "config.json";
  fs::remove_all(paths.corpus);
  fs::create_directories(root);

  Centers centers;
  centers.a = make_centers(rng, face::kEmbADim, options.blob_separation);
  centers.b = make_centers(rng, face::kEmbBDim, options.blob_separation);

  ingest::CorpusStore store(paths.corpus);
  std::vector<json> stub_rows;
  std::vector<json> ratings;
  std::vector<face::FaceRecord> faces;
  std::vector<ingest::ArticleRecord> articles;
  std::vector<FaceTruth> face_truth;

  std::vector<std::pair<Venue, ingest::ImageRef>> images;
  for (std::size_t i = 0; i < options.articles; ++i) {
    ingest::ArticleRecord a;
    a.venue = i % 2 == 0 ? Venue::NYT : Venue::FOX;
    a.category = static_cast<Category>(rng.below(label_count<Category>()));
    const int year = stats::kFirstYear + int(rng.below(kYears));
    a.publish_date = Date(year, 1, 1).plus_days(int(rng.below(365)));
    a.url = ingest::canonical_url(article_url(a.venue, a.publish_date, a.category, i));
    a.article_id = ingest::article_id_for(a.url);
    a.title = fmt::format("Dispatch {}", i);
    a.body = make_body(rng, i);

    const auto truth = draw_text(rng, model, a.venue, year);
    const std::string hash = short_hash(a.body);
    stub_rows.push_back({{"task", "emotion"}, {"text_hash", hash}, {"label", to_string(truth.emotion)}});
    stub_rows.push_back({{"task", "sentiment"}, {"text_hash", hash}, {"label", to_string(truth.sentiment)}});
    stub_rows.push_back({{"task", "topic"}, {"text_hash", hash}, {"label", to_string(truth.topic)}});
    if (truth.race)
      stub_rows.push_back({{"task", "race"},
                           {"text_hash", hash},
                           {"label", to_string(*truth.race)},
                           {"confidence", 0.5 + 0.5 * double(rng.below(1000)) / 1000.0}});
    else
      stub_rows.push_back({{"task", "race"}, {"text_hash", hash}, {"label", "None"}});
    stub_rows.push_back({{"task", "vp"},
                         {"text_hash", short_hash(annotate::build_vp_prompt(a.body))},
                         {"label", "Answer: " + annotate::format_vp_response(truth.vp)}});

    if (i < options.rated_items) {
      ratings.push_back({{"task", "emotion"},
                         {"item_id", a.article_id},
                         {"ratings", rater_labels(rng, std::string(to_string(truth.emotion)), names_of<Emotion>())}});
      ratings.push_back(
          {{"task", "sentiment"},
           {"item_id", a.article_id},
           {"ratings", rater_labels(rng, std::string(to_string(truth.sentiment)), names_of<Sentiment>())}});
      ratings.push_back({{"task", "category"},
                         {"item_id", a.article_id},
                         {"ratings", rater_labels(rng, std::string(to_string(truth.topic)), names_of<Topic>())}});
      ratings.push_back({{"task", "victim"},
                         {"item_id", a.article_id},
                         {"ratings", rater_labels(rng, annotate::victim_answer(truth.vp.victim), vp_names(true))}});
      ratings.push_back(
          {{"task", "perpetrator"},
           {"item_id", a.article_id},
           {"ratings", rater_labels(rng, annotate::perpetrator_answer(truth.vp.perpetrator), vp_names(false))}});
    }

    for (std::size_t k = 0; k < options.images_per_article; ++k) {
      // one image in twenty is reused from an earlier article of the other venue
      const ingest::ImageRef* shared = nullptr;
      if (i > 10 && rng.uniform() < 0.05) {
        const auto& [v, ref] = images[rng.below(images.size())];
        if (v != a.venue) shared = &ref;
      }
      if (shared) {
        a.image_refs.push_back(*shared);
        continue;
      }
      ingest::ImageRef ref;
      ref.source_url = fmt::format("https://images.example/{}/{}-{}.jpg", venue_key(a.venue), i, k);
      ref.image_id = short_hash(ref.source_url);
      ref.width_px = 300 + int(rng.below(900));
      ref.height_px = 200 + int(rng.below(700));
      a.image_refs.push_back(ref);
      images.emplace_back(a.venue, ref);

      const std::size_t face_count = rng.uniform() < 0.2 ? 2 : 1;
      for (std::size_t f = 0; f < face_count; ++f) {
        const auto truth_face = draw_face(rng, model, a.venue, a.category);
        const Race7 race7 = split_race(rng, truth_face.race);
        face::FaceRecord r;
        r.face_id = fmt::format("face-{:05}-{}", i, faces.size());
        r.detection.image_id = ref.image_id;
        const double u = rng.uniform();
        if (u < options.low_confidence_rate * 0.2)
          r.detection.confidence = 0.9;
        else if (u < options.low_confidence_rate)
          r.detection.confidence = 0.5 + 0.4 * rng.uniform();
        else
          r.detection.confidence = 0.9001 + 0.0998 * rng.uniform();
        r.image_width_px = ref.width_px;
        r.image_height_px = ref.height_px;
        r.detection.bbox.w = 20 + std::int64_t(rng.below(std::uint64_t(ref.width_px / 2)));
        r.detection.bbox.h = 20 + std::int64_t(rng.below(std::uint64_t(ref.height_px / 2)));
        r.detection.bbox.x = std::int64_t(rng.below(std::uint64_t(ref.width_px - r.detection.bbox.w)));
        r.detection.bbox.y = std::int64_t(rng.below(std::uint64_t(ref.height_px - r.detection.bbox.h)));
        r.emb_a = sample(rng, centers.a[index_of(race7)]);
        r.emb_b = sample(rng, centers.b[index_of(race7)]);
        const bool gender_right = rng.uniform() < 0.95;
        r.gender_pred = gender_right ? truth_face.gender
                                     : (truth_face.gender == Gender::Male ? Gender::Female : Gender::Male);
        r.age_probs = age_probs_for(rng, truth_face.age);
        faces.push_back(std::move(r));
        face_truth.push_back(truth_face);
      }
    }
    store.put_article(a);
    articles.push_back(std::move(a));
  }
  store.write_manifest();

  std::size_t rated_faces = 0;
  for (std::size_t i = 0; i < faces.size() && rated_faces < options.rated_items; ++i) {
    if (faces[i].detection.confidence <= face::kMinConfidence) continue;
    ++rated_faces;
    const auto& t = face_truth[i];
    ratings.push_back({{"task", "race"},
                       {"item_id", faces[i].face_id},
                       {"ratings", rater_labels(rng, std::string(to_string(t.race)), names_of<Race6>())}});
    ratings.push_back({{"task", "gender"},
                       {"item_id", faces[i].face_id},
                       {"ratings", rater_labels(rng, std::string(to_string(t.gender)), names_of<Gender>())}});
    ratings.push_back({{"task", "age"},
                       {"item_id", faces[i].face_id},
                       {"ratings", rater_labels(rng, std::string(to_string(t.age)), names_of<AgeBracket>())}});
  }
  face::write_embeddings(face::embedding_paths(paths.faces), faces);

  std::vector<face::FaceRecord> train;
  std::vector<json> labels;
  for (std::size_t i = 0; i < options.train_per_class; ++i) {
    for (Race7 race : all_labels<Race7>()) {
      face::FaceRecord r;
      r.face_id = fmt::format("train-{:05}", train.size());
      r.detection.image_id = r.face_id;
      r.detection.confidence = 1.0;
      r.detection.bbox = {0, 0, 224, 224};
      r.image_width_px = 224;
      r.image_height_px = 224;
      r.emb_a = sample(rng, centers.a[index_of(race)]);
      r.emb_b = sample(rng, centers.b[index_of(race)]);
      labels.push_back({{"face_id", r.face_id}, {"race", to_string(race)}});
      train.push_back(std::move(r));
    }
  }
  face::write_embeddings(face::embedding_paths(paths.train), train);
  write_file_atomic(paths.train_labels, jsonl(labels));
  write_file_atomic(paths.stub_table, jsonl(stub_rows));
  write_file_atomic(paths.ratings, jsonl(ratings));

  const json config = {
      {"out", "run"},
      {"seed", options.seed},
      {"corpus", "corpus"},
      {"faces", {{"embeddings", "faces"}, {"area_mode", "image"}}},
      {"train", {{"embeddings", "train"}, {"labels", "train_labels.jsonl"}, {"grid_search", true}}},
      {"classify", {{"merge_mode", "label"}}},
      {"annotate",
       {{"tasks", "emotion,sentiment,topic,race,vp"},
        {"provider", {{"name", "stub"}, {"seed", options.seed}, {"stub_table", "stub_table.jsonl"}}},
        {"timestamp", "2023-01-01T00:00:00Z"}}},
      {"validate", {{"ratings", "ratings.jsonl"}}},
      {"stats", {{"chi2_mode", "group-vs-rest"}, {"pooled", false}, {"vp_unspecified", false}}}};
  write_file_atomic(paths.config, config.dump(2) + "\n");
  return paths;
}

}  // namespace biaskit::synth
