#include "recovery.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

namespace recovery {

using namespace biaskit;

namespace {

class Checker {
 public:
  explicit Checker(Report& r) : r_(r) {}

  void cell(const std::string& estimator, const std::string& where, double estimate, double planted, double se) {
    auto& t = r_.by_estimator[estimator];
    ++t.cells;
    ++r_.cells;
    const bool ok = planted == 0.0 ? estimate == 0.0 : std::abs(estimate - planted) <= 3.0 * se;
    if (ok) {
      ++t.within;
      ++r_.within;
    } else if (r_.misses.size() < 20) {
      r_.misses.push_back(fmt::format("{} {}: estimate {} planted {} se {}", estimator, where, estimate, planted, se));
    }
  }

  void share(const std::string& estimator, const std::string& where, double estimate, double planted, std::int64_t n) {
    cell(estimator, where, estimate, planted, std::sqrt(planted * (1 - planted) / double(n)));
  }

  template <typename Range>
  void sums_to(const Range& values, double total) {
    double s = 0;
    for (double v : values) s += v;
    r_.max_sum_error = std::max(r_.max_sum_error, std::abs(s - total));
    ++r_.sum_checks;
  }

 private:
  Report& r_;
};

std::string name(Venue v) { return std::string(to_string(v)); }

template <Labeled G, typename Planted>
void proportions(Checker& ck, const std::string& estimator, const std::vector<stats::GroupObservation<G>>& obs,
                 Planted planted) {
  for (const auto& c : stats::group_proportions<G>(obs)) {
    ck.sums_to(c.proportions, 1.0);
    const auto p = planted(c.venue, c.category);
    for (auto g : all_labels<G>())
      ck.share(estimator, fmt::format("{}/{}/{}", name(c.venue), to_string(c.category), to_string(g)),
               c.proportions[index_of(g)], p[index_of(g)], c.total);
  }
}

}  // namespace

Report check(const synth::PlantedModel& m, const synth::BiasCorpus& corpus) {
  Report r;
  Checker ck(r);

  std::vector<stats::GroupObservation<Race6>> race;
  std::vector<stats::GroupObservation<Gender>> gender;
  std::vector<stats::GroupObservation<AgeBracket>> age;
  for (const auto& f : corpus.faces) {
    if (f.race) race.push_back({f.venue, f.category, *f.race});
    if (f.gender) gender.push_back({f.venue, f.category, *f.gender});
    if (f.age) age.push_back({f.venue, f.category, *f.age});
  }
  proportions<Race6>(ck, "group_proportions", race, [&](Venue v, Category c) { return m.face_race(v, c); });
  proportions<Gender>(ck, "group_proportions", gender, [&](Venue v, Category c) {
    const double male = m.face_male(v, c);
    std::array<double, label_count<Gender>()> p{};
    p[index_of(Gender::Male)] = male;
    p[index_of(Gender::Female)] = 1 - male;
    return p;
  });
  proportions<AgeBracket>(ck, "group_proportions", age, [&](Venue v, Category) { return m.face_age(v); });

  const auto non_neutral = stats::filter_non_neutral(corpus.text);
  for (const auto& c : stats::emotion_shares(non_neutral)) {
    ck.sums_to(c.shares, 1.0);
    for (auto e : all_labels<Emotion>()) {
      if (e == Emotion::Neutral) continue;
      ck.share("emotion_shares", fmt::format("{}/{}/{}", name(c.venue), to_string(c.race), to_string(e)),
               c.shares[index_of(e)], m.emotion_share(c.venue, c.race, e), c.total);
    }
  }

  for (const auto& c : stats::sentiment_table(corpus.text)) {
    const auto n = c.positive + c.negative;
    const double p = m.positive(c.venue, c.race);
    ck.cell("sentiment_balance",
            fmt::format("{}/{}/{}", name(c.venue), to_string(c.race), c.year ? std::to_string(*c.year) : "all"),
            c.balance, m.sentiment_balance(c.venue, c.race, c.year), 200.0 * std::sqrt(p * (1 - p) / double(n)));
  }

  const auto shares = stats::topic_race_shares(corpus.text);
  for (const auto& c : shares.cells) {
    ck.sums_to(c.shares, 1.0);
    for (auto rc : all_labels<Race6>())
      ck.share("topic_race_shares", fmt::format("{}/{}/{}", name(c.venue), to_string(c.topic), to_string(rc)),
               c.shares[index_of(rc)], m.topic_race_share(c.venue, c.topic, rc), c.total);
  }
  for (const auto& d : stats::race_topic_distribution(corpus.text)) ck.sums_to(d.percent, 100.0);

  // series for each minority race's planted top topic, both venues
  std::set<std::pair<Topic, Race6>> tracked;
  for (auto v : all_labels<Venue>())
    for (auto rc : all_labels<Race6>()) {
      if (rc == Race6::White) continue;
      Topic best = Topic::Animals;
      double best_share = -1;
      for (auto t : all_labels<Topic>())
        if (m.topic_race_share(v, t, rc) > best_share) {
          best_share = m.topic_race_share(v, t, rc);
          best = t;
        }
      tracked.insert({best, rc});
    }
  for (const auto& [topic, rc] : tracked)
    for (const auto& pt : stats::temporal_topic_series(corpus.text, topic, rc)) {
      if (!pt.share) continue;
      ck.share("temporal_series", fmt::format("{}/{}/{}/{}", name(pt.venue), to_string(topic), to_string(rc), pt.year),
               *pt.share, m.topic_race_share(pt.venue, topic, rc, pt.year), pt.total);
    }

  for (const auto& mat : stats::vp_matrix(corpus.text, false)) {
    for (auto victim : all_labels<Race6>()) {
      const auto& row = mat.values[index_of(victim)];
      if (!row.front()) continue;
      std::vector<double> vals;
      for (auto perp : all_labels<Race6>()) {
        const double v = *row[index_of(perp)];
        vals.push_back(v);
        ck.share("vp_matrix", fmt::format("{}/{}/{}", name(mat.venue), to_string(victim), to_string(perp)), v,
                 m.vp_share(mat.venue, victim, perp), mat.row_totals[index_of(victim)]);
      }
      ck.sums_to(vals, 1.0);
    }
  }

  std::map<std::pair<Venue, std::optional<Category>>, std::array<std::int64_t, label_count<AgeBracket>()>> brackets;
  for (const auto& a : age) {
    ++brackets[{a.venue, a.category}][index_of(a.group)];
    ++brackets[{a.venue, std::nullopt}][index_of(a.group)];
  }
  for (const auto& [key, counts] : brackets) {
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    ck.cell("mean_age",
            fmt::format("{}/{}", name(key.first), key.second ? std::string(to_string(*key.second)) : "All"),
            stats::mean_age(counts), m.mean_age(key.first), m.mean_age_sd(key.first) / std::sqrt(double(n)));
  }
  return r;
}

}  // namespace recovery
