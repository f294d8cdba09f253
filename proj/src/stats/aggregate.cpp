#include "biaskit/stats/aggregate.hpp"

#include <cmath>
#include <tuple>

#include "biaskit/core/error.hpp"

namespace biaskit::stats {

namespace {

constexpr std::size_t kVenues = label_count<Venue>();

StatResult undefined_result(std::vector<std::pair<std::string, std::string>> keys, std::vector<double> estimates) {
  StatResult r;
  r.keys = std::move(keys);
  r.estimates = std::move(estimates);
  r.statistic = std::nan("");
  r.p_value = std::nan("");
  r.defined = false;
  return r;
}

StatResult from_test(std::vector<std::pair<std::string, std::string>> keys, std::vector<double> estimates,
                     const TestResult& t) {
  StatResult r;
  r.keys = std::move(keys);
  r.estimates = std::move(estimates);
  r.statistic = t.statistic;
  r.p_value = t.p_value;
  r.dof = t.dof;
  r.stars = star_format(t.p_value);
  return r;
}

template <typename Fn>
StatResult run_test(std::vector<std::pair<std::string, std::string>> keys, std::vector<double> estimates, Fn&& test) {
  TestResult t;
  try {
    t = test();
  } catch (const TestUndefined&) {
    return undefined_result(std::move(keys), std::move(estimates));
  }
  return from_test(std::move(keys), std::move(estimates), t);
}

double share(std::int64_t part, std::int64_t whole) { return whole > 0 ? double(part) / double(whole) : std::nan(""); }

}  // namespace

template <Labeled G>
std::vector<StatResult> representation_tests(const std::vector<ProportionCell<G>>& cells, Chi2Mode mode) {
  constexpr std::size_t k = label_count<G>();
  std::map<Category, std::array<const ProportionCell<G>*, kVenues>> by_category;
  for (const auto& c : cells) by_category[c.category][index_of(c.venue)] = &c;

  std::vector<StatResult> out;
  for (const auto& [category, venues] : by_category) {
    std::array<std::array<std::int64_t, k>, kVenues> counts{};
    std::array<std::int64_t, kVenues> totals{};
    for (std::size_t v = 0; v < kVenues; ++v) {
      if (!venues[v]) continue;
      counts[v] = venues[v]->counts;
      totals[v] = venues[v]->total;
    }
    const std::string cat(to_string(category));
    if (mode == Chi2Mode::Full) {
      std::vector<std::vector<std::int64_t>> table(kVenues, std::vector<std::int64_t>(k));
      for (std::size_t v = 0; v < kVenues; ++v)
        for (std::size_t g = 0; g < k; ++g) table[v][g] = counts[v][g];
      out.push_back(run_test({{"category", cat}, {"group", "all"}},
                             {double(totals[0]), double(totals[1])},
                             [&] { return chi2_independence(table); }));
      continue;
    }
    for (std::size_t g = 0; g < k; ++g) {
      Contingency2x2 t{{{counts[0][g], totals[0] - counts[0][g]}, {counts[1][g], totals[1] - counts[1][g]}}};
      out.push_back(run_test({{"category", cat}, {"group", std::string(to_string(all_labels<G>()[g]))}},
                             {share(counts[0][g], totals[0]), share(counts[1][g], totals[1])},
                             [&] { return chi2_2x2(t); }));
    }
  }
  return out;
}

template std::vector<StatResult> representation_tests(const std::vector<ProportionCell<Race6>>&, Chi2Mode);
template std::vector<StatResult> representation_tests(const std::vector<ProportionCell<Race7>>&, Chi2Mode);
template std::vector<StatResult> representation_tests(const std::vector<ProportionCell<Gender>>&, Chi2Mode);
template std::vector<StatResult> representation_tests(const std::vector<ProportionCell<AgeBracket>>&, Chi2Mode);

namespace {

template <Labeled G>
void area_tests_for(std::span<const FaceObservation> faces, std::optional<G> FaceObservation::*field,
                    bool pooled, std::vector<StatResult>& out) {
  for (G g : all_labels<G>()) {
    std::array<std::vector<double>, kVenues> samples;
    for (const auto& f : faces) {
      if (!f.area_z || !(f.*field) || *(f.*field) != g) continue;
      samples[index_of(f.venue)].push_back(*f.area_z);
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return std::nan("");
      double s = 0;
      for (double x : v) s += x;
      return s / double(v.size());
    };
    out.push_back(run_test({{"dimension", std::string(LabelTraits<G>::kind)}, {"group", std::string(to_string(g))}},
                           {mean(samples[0]), mean(samples[1]), double(samples[0].size()), double(samples[1].size())},
                           [&] { return pooled ? pooled_t(samples[0], samples[1]) : welch_t(samples[0], samples[1]); }));
  }
}

}  // namespace

std::vector<StatResult> area_tests(std::span<const FaceObservation> faces, bool pooled_variance) {
  std::vector<StatResult> out;
  area_tests_for<Race6>(faces, &FaceObservation::race, pooled_variance, out);
  area_tests_for<Gender>(faces, &FaceObservation::gender, pooled_variance, out);
  return out;
}

std::vector<TextObservation> filter_non_neutral(std::span<const TextObservation> records) {
  std::vector<TextObservation> out;
  for (const auto& r : records)
    if (r.emotion && *r.emotion != Emotion::Neutral) out.push_back(r);
  return out;
}

std::vector<EmotionCell> emotion_shares(std::span<const TextObservation> non_neutral) {
  std::map<std::pair<Venue, Race6>, EmotionCell> cells;
  for (const auto& r : non_neutral) {
    if (!r.race || !r.emotion) continue;
    if (*r.emotion == Emotion::Neutral)
      throw InvalidInput("emotion_shares: neutral record '" + r.article_id + "' in non-neutral input");
    auto& c = cells[{r.venue, *r.race}];
    c.venue = r.venue;
    c.race = *r.race;
    ++c.counts[index_of(*r.emotion)];
    ++c.total;
  }
  std::vector<EmotionCell> out;
  for (auto& [key, c] : cells) {
    for (std::size_t e = 0; e < c.counts.size(); ++e) c.shares[e] = double(c.counts[e]) / double(c.total);
    out.push_back(c);
  }
  return out;
}

std::vector<StatResult> emotion_tests(const std::vector<EmotionCell>& cells) {
  std::map<Race6, std::array<const EmotionCell*, kVenues>> by_race;
  for (const auto& c : cells) by_race[c.race][index_of(c.venue)] = &c;
  std::vector<StatResult> out;
  for (const auto& [race, venues] : by_race) {
    for (Emotion e : all_labels<Emotion>()) {
      if (e == Emotion::Neutral) continue;
      const std::size_t ei = index_of(e);
      std::array<std::int64_t, kVenues> hit{}, total{};
      for (std::size_t v = 0; v < kVenues; ++v) {
        if (!venues[v]) continue;
        hit[v] = venues[v]->counts[ei];
        total[v] = venues[v]->total;
      }
      Contingency2x2 t{{{hit[0], total[0] - hit[0]}, {hit[1], total[1] - hit[1]}}};
      out.push_back(run_test({{"race", std::string(to_string(race))}, {"emotion", std::string(to_string(e))}},
                             {share(hit[0], total[0]), share(hit[1], total[1])}, [&] { return chi2_2x2(t); }));
    }
  }
  return out;
}

std::map<Venue, std::array<std::int64_t, label_count<Emotion>()>> emotion_counts(
    std::span<const TextObservation> records) {
  std::map<Venue, std::array<std::int64_t, label_count<Emotion>()>> out;
  for (const auto& r : records) {
    if (!r.race || !r.emotion) continue;
    ++out[r.venue][index_of(*r.emotion)];
  }
  return out;
}

double sentiment_balance(std::int64_t positive, std::int64_t negative) {
  if (positive < 0 || negative < 0) throw InvalidInput("sentiment_balance: negative count");
  if (positive + negative == 0) throw Undefined("sentiment_balance: no sentiment-labelled articles");
  return 100.0 * double(positive - negative) / double(positive + negative);
}

std::vector<SentimentCell> sentiment_table(std::span<const TextObservation> records) {
  // year 0 is the pooled row; real years sort after it
  std::map<std::tuple<Venue, Race6, int>, SentimentCell> cells;
  for (const auto& r : records) {
    if (!r.race || !r.sentiment) continue;
    for (int year : {0, r.year}) {
      auto& c = cells[{r.venue, *r.race, year}];
      c.venue = r.venue;
      c.race = *r.race;
      if (year != 0) c.year = year;
      (*r.sentiment == Sentiment::Positive ? c.positive : c.negative) += 1;
    }
  }
  std::vector<SentimentCell> out;
  for (auto& [key, c] : cells) {
    c.balance = sentiment_balance(c.positive, c.negative);
    out.push_back(c);
  }
  return out;
}

std::map<Venue, double> mean_abs_balance(const std::vector<SentimentCell>& cells) {
  std::map<Venue, std::pair<double, int>> acc;
  for (const auto& c : cells) {
    if (c.year) continue;
    acc[c.venue].first += std::abs(c.balance);
    acc[c.venue].second += 1;
  }
  std::map<Venue, double> out;
  for (const auto& [venue, a] : acc) out[venue] = a.first / a.second;
  return out;
}

TopicRaceShares topic_race_shares(std::span<const TextObservation> records) {
  std::map<std::pair<Venue, Topic>, TopicRaceCell> cells;
  for (const auto& r : records) {
    if (!r.topic || !r.race) continue;
    auto& c = cells[{r.venue, *r.topic}];
    c.venue = r.venue;
    c.topic = *r.topic;
    ++c.counts[index_of(*r.race)];
    ++c.total;
  }
  TopicRaceShares out;
  for (auto& [key, c] : cells) {
    for (std::size_t g = 0; g < c.counts.size(); ++g) c.shares[g] = double(c.counts[g]) / double(c.total);
    out.cells.push_back(c);
  }
  for (Venue venue : all_labels<Venue>()) {
    for (Race6 race : all_labels<Race6>()) {
      if (race == Race6::White) continue;
      const std::size_t ri = index_of(race);
      const TopicRaceCell* best = nullptr;
      for (const auto& c : out.cells) {
        if (c.venue != venue || c.counts[ri] == 0) continue;
        if (!best || c.shares[ri] > best->shares[ri]) best = &c;
      }
      if (!best) continue;
      out.top.push_back({venue, race, best->topic, best->shares[ri], best->counts[ri], best->total});
    }
  }
  return out;
}

std::vector<RaceTopicDistribution> race_topic_distribution(std::span<const TextObservation> records) {
  std::map<std::pair<Venue, Race6>, std::pair<RaceTopicDistribution, std::array<std::int64_t, label_count<Topic>()>>>
      acc;
  for (const auto& r : records) {
    if (!r.topic || !r.race) continue;
    auto& [d, counts] = acc[{r.venue, *r.race}];
    d.venue = r.venue;
    d.race = *r.race;
    ++d.total;
    ++counts[index_of(*r.topic)];
  }
  std::vector<RaceTopicDistribution> out;
  for (auto& [key, entry] : acc) {
    auto& [d, counts] = entry;
    for (std::size_t t = 0; t < counts.size(); ++t) d.percent[t] = 100.0 * double(counts[t]) / double(d.total);
    out.push_back(d);
  }
  return out;
}

std::vector<SeriesPoint> temporal_topic_series(std::span<const TextObservation> records, Topic topic, Race6 race,
                                               int first_year, int last_year) {
  if (last_year < first_year) throw InvalidInput("temporal_topic_series: empty year range");
  const std::size_t years = std::size_t(last_year - first_year + 1);
  std::vector<SeriesPoint> out;
  for (Venue venue : all_labels<Venue>()) {
    for (std::size_t y = 0; y < years; ++y) {
      SeriesPoint p;
      p.venue = venue;
      p.year = first_year + int(y);
      out.push_back(p);
    }
  }
  for (const auto& r : records) {
    if (!r.topic || !r.race || *r.topic != topic) continue;
    if (r.year < first_year || r.year > last_year) continue;
    auto& p = out[index_of(r.venue) * years + std::size_t(r.year - first_year)];
    ++p.total;
    if (*r.race == race) ++p.count;
  }
  for (auto& p : out)
    if (p.total > 0) p.share = double(p.count) / double(p.total);
  return out;
}

std::vector<VpMatrix> vp_matrix(std::span<const TextObservation> records, bool include_unspecified) {
  constexpr std::size_t races = label_count<Race6>();
  const std::size_t cols = races + (include_unspecified ? 1 : 0);
  std::vector<VpMatrix> out(kVenues);
  for (Venue venue : all_labels<Venue>()) {
    auto& m = out[index_of(venue)];
    m.venue = venue;
    m.with_unspecified = include_unspecified;
    for (Race6 r : all_labels<Race6>()) m.columns.emplace_back(to_string(r));
    if (include_unspecified) m.columns.emplace_back("Unspecified");
    m.counts.assign(races, std::vector<std::int64_t>(cols, 0));
  }
  for (const auto& r : records) {
    if (!r.vp) continue;
    const auto victim = annotate::as_race(r.vp->victim);
    if (!victim) continue;
    std::size_t col;
    if (auto perp = annotate::as_race(r.vp->perpetrator))
      col = index_of(*perp);
    else if (include_unspecified && r.vp->perpetrator == annotate::VpRole::Unspecified)
      col = races;
    else
      continue;
    auto& m = out[index_of(r.venue)];
    ++m.counts[index_of(*victim)][col];
    ++m.row_totals[index_of(*victim)];
  }
  for (auto& m : out) {
    m.values.assign(races, std::vector<std::optional<double>>(cols));
    for (std::size_t v = 0; v < races; ++v) {
      if (m.row_totals[v] == 0) continue;
      for (std::size_t p = 0; p < cols; ++p) m.values[v][p] = double(m.counts[v][p]) / double(m.row_totals[v]);
    }
  }
  return out;
}

double mean_age(const std::array<std::int64_t, label_count<AgeBracket>()>& bracket_counts) {
  double weighted = 0, total = 0;
  for (std::size_t b = 0; b < bracket_counts.size(); ++b) {
    if (bracket_counts[b] < 0) throw InvalidInput("mean_age: negative count");
    weighted += double(bracket_counts[b]) * kAgeMidpoints[b];
    total += double(bracket_counts[b]);
  }
  if (total == 0) throw Undefined("mean_age: no faces");
  return weighted / total;
}

}  // namespace biaskit::stats
