#include "biaskit/report/report.hpp"

#include <fmt/format.h>

#include <array>
#include <map>
#include <set>

#include "biaskit/core/error.hpp"
#include "biaskit/core/files.hpp"
#include "biaskit/core/log.hpp"

namespace biaskit::report {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<ArtifactInfo, 14> kArtifacts{{
    {"fig2a_representation", "Fig 2A", "Race and gender representation by venue and category"},
    {"fig2b_area", "Fig 2B", "Normalized image area by race and gender group"},
    {"table7_image_repr_sig", "Table 7", "Chi-squared tests of image representation between venues"},
    {"fig3_emotion", "Fig 3", "Emotion shares of non-neutral articles mentioning each race"},
    {"table8_emotion_counts", "Table 8", "Articles per emotion class"},
    {"table9_emotion_sig", "Table 9", "Chi-squared tests of emotion shares between venues"},
    {"fig4_sentiment", "Fig 4", "Sentiment balance of articles mentioning each race"},
    {"fig5_topics", "Fig 5", "Race shares per topic and top topic per minority race"},
    {"fig6_temporal_topics", "Fig 6", "Yearly race share of the top topics"},
    {"table10_nyt_topics", "Table 10", "Topic distribution per race, New York Times"},
    {"table11_fox_topics", "Table 11", "Topic distribution per race, Fox News"},
    {"fig7_victim_perpetrator", "Fig 7", "Victim and perpetrator race pairs"},
    {"fig10_age_representation", "Fig 10", "Age bracket representation and mean age"},
    {"table6_validation", "Table 6", "Human validation of model outputs"},
}};

std::string str(std::string_view s) { return std::string(s); }

Table make_table(std::string_view name, std::vector<std::string> columns) {
  const auto* info = find_artifact(name);
  Table t;
  t.name = str(name);
  t.artifact = str(info->artifact);
  t.columns = std::move(columns);
  return t;
}

Cell opt(const std::optional<double>& v) { return v ? number(*v) : Cell{}; }
Cell count(std::int64_t v) { return v; }

std::vector<Cell> test_cells(const stats::StatResult& r) {
  if (!r.defined) return {Cell{}, Cell{}, Cell{}, Cell{}, false};
  return {number(r.statistic), number(r.dof), number(r.p_value), str(stats::to_string(r.stars)), true};
}

template <Labeled G>
std::vector<stats::GroupObservation<G>> group_obs(std::span<const stats::FaceObservation> faces,
                                                  std::optional<G> stats::FaceObservation::*field) {
  std::vector<stats::GroupObservation<G>> out;
  for (const auto& f : faces)
    if (f.*field) out.push_back({f.venue, f.category, *(f.*field)});
  return out;
}

template <Labeled G>
void add_representation(Table& t, const std::vector<stats::ProportionCell<G>>& cells) {
  for (const auto& c : cells)
    for (G g : all_labels<G>())
      t.add_row({str(LabelTraits<G>::kind), str(to_string(c.venue)), str(to_string(c.category)), str(to_string(g)),
                 count(c.counts[index_of(g)]), count(c.total), number(c.proportions[index_of(g)])});
}

template <Labeled G>
void add_repr_tests(Table& t, const std::vector<stats::ProportionCell<G>>& cells, stats::Chi2Mode mode) {
  std::map<std::pair<Venue, Category>, std::int64_t> totals;
  for (const auto& c : cells) totals[{c.venue, c.category}] = c.total;
  auto total = [&](Venue v, const std::string& cat) -> Cell {
    auto it = totals.find({v, label_from_string<Category>(cat)});
    return it == totals.end() ? Cell{std::int64_t{0}} : Cell{it->second};
  };
  for (const auto& r : stats::representation_tests(cells, mode)) {
    const std::string& cat = r.keys[0].second;
    std::vector<Cell> row{str(LabelTraits<G>::kind), cat, r.keys[1].second};
    if (mode == stats::Chi2Mode::Full) {
      row.insert(row.end(), {Cell{}, Cell{}});
    } else {
      row.push_back(number(r.estimates[0]));
      row.push_back(number(r.estimates[1]));
    }
    row.push_back(total(Venue::NYT, cat));
    row.push_back(total(Venue::FOX, cat));
    for (auto& c : test_cells(r)) row.push_back(std::move(c));
    t.add_row(std::move(row));
  }
}

Table fig2a(std::span<const stats::FaceObservation> faces) {
  auto t = make_table("fig2a_representation", {"attribute", "venue", "category", "group", "count", "total", "proportion"});
  const auto race = group_obs<Race6>(faces, &stats::FaceObservation::race);
  const auto gender = group_obs<Gender>(faces, &stats::FaceObservation::gender);
  add_representation(t, stats::group_proportions<Race6>(race));
  add_representation(t, stats::group_proportions<Gender>(gender));
  return t;
}

Table fig2b(std::span<const stats::FaceObservation> faces, bool pooled) {
  auto t = make_table("fig2b_area", {"dimension", "group", "nyt_mean_z", "fox_mean_z", "nyt_n", "fox_n", "test", "t",
                                     "dof", "p_value", "stars", "defined"});
  for (const auto& r : stats::area_tests(faces, pooled)) {
    std::vector<Cell> row{r.keys[0].second,
                          r.keys[1].second,
                          number(r.estimates[0]),
                          number(r.estimates[1]),
                          count(std::int64_t(r.estimates[2])),
                          count(std::int64_t(r.estimates[3])),
                          str(pooled ? "pooled" : "welch")};
    for (auto& c : test_cells(r)) row.push_back(std::move(c));
    t.add_row(std::move(row));
  }
  return t;
}

Table table7(std::span<const stats::FaceObservation> faces, stats::Chi2Mode mode) {
  auto t = make_table("table7_image_repr_sig", {"attribute", "category", "group", "nyt_share", "fox_share", "nyt_n",
                                                "fox_n", "chi2", "dof", "p_value", "stars", "defined"});
  add_repr_tests(t, stats::group_proportions<Race6>(group_obs<Race6>(faces, &stats::FaceObservation::race)), mode);
  add_repr_tests(t, stats::group_proportions<Gender>(group_obs<Gender>(faces, &stats::FaceObservation::gender)), mode);
  return t;
}

Table fig3(const std::vector<stats::EmotionCell>& cells) {
  auto t = make_table("fig3_emotion", {"venue", "race", "emotion", "count", "total", "share"});
  for (const auto& c : cells)
    for (Emotion e : all_labels<Emotion>()) {
      if (e == Emotion::Neutral) continue;
      t.add_row({str(to_string(c.venue)), str(to_string(c.race)), str(to_string(e)), count(c.counts[index_of(e)]),
                 count(c.total), number(c.shares[index_of(e)])});
    }
  return t;
}

Table table8(std::span<const stats::TextObservation> text) {
  auto t = make_table("table8_emotion_counts", {"venue", "emotion", "count"});
  for (const auto& [venue, counts] : stats::emotion_counts(text))
    for (Emotion e : all_labels<Emotion>())
      t.add_row({str(to_string(venue)), str(to_string(e)), count(counts[index_of(e)])});
  return t;
}

Table table9(const std::vector<stats::EmotionCell>& cells) {
  auto t = make_table("table9_emotion_sig",
                      {"race", "emotion", "nyt_share", "fox_share", "chi2", "dof", "p_value", "stars", "defined"});
  for (const auto& r : stats::emotion_tests(cells)) {
    std::vector<Cell> row{r.keys[0].second, r.keys[1].second, number(r.estimates[0]), number(r.estimates[1])};
    for (auto& c : test_cells(r)) row.push_back(std::move(c));
    t.add_row(std::move(row));
  }
  return t;
}

Table fig4(std::span<const stats::TextObservation> text) {
  auto t = make_table("fig4_sentiment", {"kind", "venue", "race", "year", "positive", "negative", "balance"});
  const auto cells = stats::sentiment_table(text);
  for (const auto& c : cells)
    t.add_row({str("cell"), str(to_string(c.venue)), str(to_string(c.race)),
               c.year ? Cell{std::int64_t(*c.year)} : Cell{str("all")}, count(c.positive), count(c.negative),
               number(c.balance)});
  for (const auto& [venue, value] : stats::mean_abs_balance(cells))
    t.add_row({str("mean_abs_balance"), str(to_string(venue)), str("all"), str("all"), Cell{}, Cell{}, number(value)});
  return t;
}

Table fig5(const stats::TopicRaceShares& shares) {
  auto t = make_table("fig5_topics", {"venue", "topic", "race", "count", "total", "share", "top"});
  std::set<std::tuple<Venue, Topic, Race6>> top;
  for (const auto& a : shares.top) top.insert({a.venue, a.topic, a.race});
  for (const auto& c : shares.cells)
    for (Race6 r : all_labels<Race6>())
      t.add_row({str(to_string(c.venue)), str(to_string(c.topic)), str(to_string(r)), count(c.counts[index_of(r)]),
                 count(c.total), number(c.shares[index_of(r)]), top.count({c.venue, c.topic, r}) > 0});
  return t;
}

Table fig6(std::span<const stats::TextObservation> text, const stats::TopicRaceShares& shares) {
  auto t = make_table("fig6_temporal_topics", {"topic", "race", "venue", "year", "count", "total", "share"});
  std::set<std::pair<Topic, Race6>> done;
  for (const auto& a : shares.top) {
    if (!done.insert({a.topic, a.race}).second) continue;
    for (const auto& p : stats::temporal_topic_series(text, a.topic, a.race))
      t.add_row({str(to_string(a.topic)), str(to_string(a.race)), str(to_string(p.venue)), std::int64_t(p.year),
                 count(p.count), count(p.total), opt(p.share)});
  }
  return t;
}

Table topic_table(std::string_view name, Venue venue, const std::vector<stats::RaceTopicDistribution>& dist) {
  std::vector<std::string> columns{"topic"};
  for (Race6 r : all_labels<Race6>()) columns.emplace_back(to_string(r));
  auto t = make_table(name, columns);
  std::array<const stats::RaceTopicDistribution*, label_count<Race6>()> by_race{};
  for (const auto& d : dist)
    if (d.venue == venue) by_race[index_of(d.race)] = &d;
  for (Topic topic : all_labels<Topic>()) {
    std::vector<Cell> row{str(to_string(topic))};
    for (const auto* d : by_race) row.push_back(d ? number(d->percent[index_of(topic)]) : Cell{});
    t.add_row(std::move(row));
  }
  std::vector<Cell> totals{str("Articles")};
  for (const auto* d : by_race) totals.push_back(count(d ? d->total : 0));
  t.add_row(std::move(totals));
  return t;
}

Table fig7(std::span<const stats::TextObservation> text, bool unspecified) {
  auto t = make_table("fig7_victim_perpetrator", {"venue", "victim", "perpetrator", "count", "row_total", "share"});
  for (const auto& m : stats::vp_matrix(text, unspecified))
    for (Race6 v : all_labels<Race6>())
      for (std::size_t p = 0; p < m.columns.size(); ++p)
        t.add_row({str(to_string(m.venue)), str(to_string(v)), m.columns[p], count(m.counts[index_of(v)][p]),
                   count(m.row_totals[index_of(v)]), opt(m.values[index_of(v)][p])});
  return t;
}

Table fig10(std::span<const stats::FaceObservation> faces, stats::Chi2Mode mode) {
  auto t = make_table("fig10_age_representation", {"venue", "category", "bracket", "count", "total", "proportion",
                                                    "mean_age", "chi2", "p_value", "stars"});
  const auto cells = stats::group_proportions<AgeBracket>(group_obs<AgeBracket>(faces, &stats::FaceObservation::age));
  std::map<std::pair<std::string, std::string>, stats::StatResult> tests;
  for (auto& r : stats::representation_tests(cells, mode)) tests[{r.keys[0].second, r.keys[1].second}] = r;
  auto mean_or_null = [](const std::array<std::int64_t, 5>& counts) -> Cell {
    try {
      return number(stats::mean_age(counts));
    } catch (const Undefined&) {
      return Cell{};
    }
  };
  std::map<Venue, std::array<std::int64_t, 5>> venue_counts;
  for (const auto& c : cells) {
    const std::string cat(to_string(c.category));
    for (AgeBracket b : all_labels<AgeBracket>()) {
      venue_counts[c.venue][index_of(b)] += c.counts[index_of(b)];
      const auto it = tests.find({cat, mode == stats::Chi2Mode::Full ? "all" : str(to_string(b))});
      std::vector<Cell> row{str(to_string(c.venue)), cat,           str(to_string(b)),
                            count(c.counts[index_of(b)]), count(c.total), number(c.proportions[index_of(b)]),
                            mean_or_null(c.counts)};
      if (it != tests.end() && it->second.defined)
        row.insert(row.end(), {number(it->second.statistic), number(it->second.p_value),
                               str(stats::to_string(it->second.stars))});
      else
        row.insert(row.end(), {Cell{}, Cell{}, Cell{}});
      t.add_row(std::move(row));
    }
  }
  for (const auto& [venue, counts] : venue_counts) {
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    for (AgeBracket b : all_labels<AgeBracket>())
      t.add_row({str(to_string(venue)), str("All"), str(to_string(b)), count(counts[index_of(b)]), count(total),
                 number(double(counts[index_of(b)]) / double(total)), mean_or_null(counts), Cell{}, Cell{}, Cell{}});
  }
  return t;
}

}  // namespace

std::span<const ArtifactInfo> artifacts() { return kArtifacts; }

const ArtifactInfo* find_artifact(std::string_view name) {
  for (const auto& a : kArtifacts)
    if (a.name == name) return &a;
  return nullptr;
}

stats::Chi2Mode chi2_mode_from_string(std::string_view s) {
  const auto key = fold_label(s);
  if (key == "groupvsrest") return stats::Chi2Mode::GroupVsRest;
  if (key == "full") return stats::Chi2Mode::Full;
  throw ConfigurationError("chi2 mode must be group-vs-rest or full, got '" + std::string(s) + "'");
}

std::vector<Table> build_tables(std::span<const stats::TextObservation> text,
                                std::span<const stats::FaceObservation> faces, const StatsOptions& options) {
  std::vector<Table> out;
  out.push_back(fig2a(faces));
  out.push_back(fig2b(faces, options.pooled_variance));
  out.push_back(table7(faces, options.chi2_mode));
  const auto non_neutral = stats::filter_non_neutral(text);
  const auto emotion_cells = stats::emotion_shares(non_neutral);
  out.push_back(fig3(emotion_cells));
  out.push_back(table8(text));
  out.push_back(table9(emotion_cells));
  out.push_back(fig4(text));
  const auto shares = stats::topic_race_shares(text);
  out.push_back(fig5(shares));
  out.push_back(fig6(text, shares));
  const auto dist = stats::race_topic_distribution(text);
  out.push_back(topic_table("table10_nyt_topics", Venue::NYT, dist));
  out.push_back(topic_table("table11_fox_topics", Venue::FOX, dist));
  out.push_back(fig7(text, options.vp_unspecified));
  out.push_back(fig10(faces, options.chi2_mode));
  return out;
}

ValidationRow validate_task(const std::string& task, const std::vector<std::vector<std::optional<std::string>>>& ratings,
                            const std::vector<std::optional<std::string>>& preds) {
  if (ratings.size() != preds.size())
    throw InvalidInput(fmt::format("validate {}: {} rated items but {} predictions", task, ratings.size(), preds.size()));
  ValidationRow row;
  row.task = task;
  row.items = ratings.size();
  std::size_t raters = 0;
  for (const auto& r : ratings) raters = std::max(raters, r.size());
  metrics::RaterTable table(ratings.size(), raters);
  std::vector<std::string> votes, predicted;
  std::vector<std::optional<std::string>> all_votes;
  std::vector<std::string> all_preds;
  for (std::size_t i = 0; i < ratings.size(); ++i) {
    for (std::size_t k = 0; k < ratings[i].size(); ++k) table.set(i, k, ratings[i][k]);
    const auto vote = metrics::majority_vote(table.item_labels(i));
    if (!vote) ++row.no_majority;
    if (!preds[i]) {
      ++row.missing_predictions;
      continue;
    }
    all_votes.push_back(vote);
    all_preds.push_back(*preds[i]);
    if (!vote) continue;
    votes.push_back(*vote);
    predicted.push_back(*preds[i]);
  }
  row.scored = votes.size();
  try {
    row.alpha = metrics::krippendorff_alpha(table);
  } catch (const Undefined&) {
  }
  if (!votes.empty()) {
    const auto report = metrics::class_report(metrics::confusion(votes, predicted));
    row.f1_macro = report.macro_avg.f1;
    row.f1_weighted = report.weighted_avg.f1;
    row.accuracy = metrics::agreement_accuracy(all_votes, all_preds);
    try {
      row.kappa = metrics::cohens_kappa(votes, predicted);
    } catch (const Undefined&) {
    }
  }
  return row;
}

Table validation_table(const std::vector<ValidationRow>& rows) {
  auto t = make_table("table6_validation", {"task", "items", "no_majority", "missing_predictions", "scored", "alpha",
                                            "f1_macro", "f1_weighted", "kappa", "accuracy"});
  for (const auto& r : rows)
    t.add_row({r.task, count(std::int64_t(r.items)), count(std::int64_t(r.no_majority)),
               count(std::int64_t(r.missing_predictions)), count(std::int64_t(r.scored)), opt(r.alpha),
               opt(r.f1_macro), opt(r.f1_weighted), opt(r.kappa), opt(r.accuracy)});
  return t;
}

std::vector<ReportIndexEntry> emit_report(const fs::path& stats_dir, const fs::path& out_dir) {
  std::vector<ReportIndexEntry> entries;
  json index = json::array();
  for (const auto& a : kArtifacts) {
    const auto src = stats_dir / (str(a.name) + ".json");
    if (!fs::exists(src)) continue;
    const auto table = table_from_json(json::parse(read_file(src)));
    if (table.name != a.name) throw FormatError(fmt::format("{}: table name '{}' does not match", src.string(), table.name));
    ReportIndexEntry e{str(a.name), str(a.artifact), str(a.name) + ".csv", str(a.name) + ".json", table.rows.size()};
    write_file_atomic(out_dir / e.csv, to_csv(table));
    write_file_atomic(out_dir / e.json, to_json(table).dump(2) + "\n");
    index.push_back({{"name", e.name},
                     {"artifact", e.artifact},
                     {"title", str(a.title)},
                     {"csv", e.csv},
                     {"json", e.json},
                     {"rows", e.rows}});
    entries.push_back(std::move(e));
  }
  if (entries.empty()) log::warn("report_empty", {{"stats_dir", stats_dir.string()}});
  write_file_atomic(out_dir / "index.json", json{{"tables", index}}.dump(2) + "\n");
  return entries;
}

}  // namespace biaskit::report
