#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biaskit/annotate/types.hpp"
#include "biaskit/core/labels.hpp"
#include "biaskit/stats/significance.hpp"

namespace biaskit::stats {

inline constexpr int kFirstYear = 2012;
inline constexpr int kLastYear = 2022;

// A classified face joined with the article that embeds its image.
struct FaceObservation {
  std::string face_id;
  std::string image_id;
  Venue venue = Venue::NYT;
  Category category = Category::Art;
  int year = kFirstYear;
  std::optional<Race6> race;
  std::optional<Gender> gender;
  std::optional<AgeBracket> age;
  std::optional<double> area_z;  // normalized area; nullopt when the venue's z is undefined
};

// An annotation joined with its article's venue, category and year.
struct TextObservation {
  std::string article_id;
  Venue venue = Venue::NYT;
  Category category = Category::Art;
  int year = kFirstYear;
  std::optional<Emotion> emotion;
  std::optional<Sentiment> sentiment;
  std::optional<Topic> topic;
  std::optional<Race6> race;
  std::optional<annotate::VictimPerpRecord> vp;
};

struct StatResult {
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<double> estimates;
  double statistic = 0;
  double p_value = 1;
  double dof = 0;
  Stars stars = Stars::ns;
  bool defined = true;  // false when the test had a zero marginal or no variance
};

// ---- group proportions (race, gender or age within venue x category) ----

template <Labeled G>
struct GroupObservation {
  Venue venue;
  Category category;
  G group;
};

template <Labeled G>
struct ProportionCell {
  Venue venue = Venue::NYT;
  Category category = Category::Art;
  std::array<std::int64_t, label_count<G>()> counts{};
  std::int64_t total = 0;
  std::array<double, label_count<G>()> proportions{};
};

// Cells are ordered by (venue, category); cells without observations are
// not emitted.
template <Labeled G>
std::vector<ProportionCell<G>> group_proportions(std::span<const GroupObservation<G>> observations) {
  std::map<std::pair<Venue, Category>, ProportionCell<G>> cells;
  for (const auto& o : observations) {
    auto& cell = cells[{o.venue, o.category}];
    cell.venue = o.venue;
    cell.category = o.category;
    ++cell.counts[index_of(o.group)];
    ++cell.total;
  }
  std::vector<ProportionCell<G>> out;
  out.reserve(cells.size());
  for (auto& [key, cell] : cells) {
    for (std::size_t g = 0; g < cell.counts.size(); ++g)
      cell.proportions[g] = double(cell.counts[g]) / double(cell.total);
    out.push_back(cell);
  }
  return out;
}

enum class Chi2Mode { GroupVsRest, Full };

// NYT vs FOX per category. GroupVsRest: one 2x2 test per (category, group).
// Full: one venue x group test per category.
template <Labeled G>
std::vector<StatResult> representation_tests(const std::vector<ProportionCell<G>>& cells, Chi2Mode mode);

// ---- normalized image area ----

// Per race and per gender group: NYT vs FOX on area_z. Estimates are
// {mean z NYT, mean z FOX, n NYT, n FOX}.
std::vector<StatResult> area_tests(std::span<const FaceObservation> faces, bool pooled_variance);

// ---- emotion ----

std::vector<TextObservation> filter_non_neutral(std::span<const TextObservation> records);

struct EmotionCell {
  Venue venue = Venue::NYT;
  Race6 race = Race6::Asian;
  std::array<std::int64_t, label_count<Emotion>()> counts{};  // Neutral stays 0
  std::int64_t total = 0;
  std::array<double, label_count<Emotion>()> shares{};
};

// Input must already exclude Neutral; records without race or emotion are
// skipped.
std::vector<EmotionCell> emotion_shares(std::span<const TextObservation> non_neutral);

// Per (race, non-neutral emotion): 2x2 venue x (emotion vs other emotions).
std::vector<StatResult> emotion_tests(const std::vector<EmotionCell>& cells);

// Per venue, counts of all seven emotions among race-mentioning articles.
std::map<Venue, std::array<std::int64_t, label_count<Emotion>()>> emotion_counts(
    std::span<const TextObservation> records);

// ---- sentiment ----

// 100 * (pos - neg) / (pos + neg); throws Undefined when both are zero.
double sentiment_balance(std::int64_t positive, std::int64_t negative);

struct SentimentCell {
  Venue venue = Venue::NYT;
  Race6 race = Race6::Asian;
  std::optional<int> year;  // nullopt: all years pooled
  std::int64_t positive = 0;
  std::int64_t negative = 0;
  double balance = 0;
};

std::vector<SentimentCell> sentiment_table(std::span<const TextObservation> records);

// Mean absolute pooled balance over the races present, per venue.
std::map<Venue, double> mean_abs_balance(const std::vector<SentimentCell>& cells);

// ---- topics ----

struct TopicRaceCell {
  Venue venue = Venue::NYT;
  Topic topic = Topic::Animals;
  std::array<std::int64_t, label_count<Race6>()> counts{};
  std::int64_t total = 0;
  std::array<double, label_count<Race6>()> shares{};
};

struct TopAssociation {
  Venue venue = Venue::NYT;
  Race6 race = Race6::Asian;
  Topic topic = Topic::Animals;
  double share = 0;
  std::int64_t count = 0;
  std::int64_t topic_total = 0;
};

struct TopicRaceShares {
  std::vector<TopicRaceCell> cells;
  std::vector<TopAssociation> top;  // one per (venue, minority race) with data
};

TopicRaceShares topic_race_shares(std::span<const TextObservation> records);

// Column-normalized view: for each (venue, race) the percentage of that
// race's articles falling under each of the 25 topics.
struct RaceTopicDistribution {
  Venue venue = Venue::NYT;
  Race6 race = Race6::Asian;
  std::int64_t total = 0;
  std::array<double, label_count<Topic>()> percent{};
};

std::vector<RaceTopicDistribution> race_topic_distribution(std::span<const TextObservation> records);

struct SeriesPoint {
  Venue venue = Venue::NYT;
  int year = kFirstYear;
  std::int64_t count = 0;
  std::int64_t total = 0;
  std::optional<double> share;  // nullopt: no articles on the topic that year
};

std::vector<SeriesPoint> temporal_topic_series(std::span<const TextObservation> records, Topic topic, Race6 race,
                                               int first_year = kFirstYear, int last_year = kLastYear);

// ---- victim / perpetrator ----

struct VpMatrix {
  Venue venue = Venue::NYT;
  bool with_unspecified = false;
  std::vector<std::string> columns;  // six races, plus "Unspecified" when enabled
  std::array<std::int64_t, label_count<Race6>()> row_totals{};
  std::vector<std::vector<std::int64_t>> counts;             // 6 x columns
  std::vector<std::vector<std::optional<double>>> values;    // nullopt rows: no victims of that race
};

std::vector<VpMatrix> vp_matrix(std::span<const TextObservation> records, bool include_unspecified);

// ---- age ----

double mean_age(const std::array<std::int64_t, label_count<AgeBracket>()>& bracket_counts);

}  // namespace biaskit::stats
