#include <doctest.h>

#include <cmath>
#include <numeric>

#include "biaskit/core/error.hpp"
#include "biaskit/core/rng.hpp"
#include "biaskit/stats/aggregate.hpp"
#include "biaskit/stats/significance.hpp"
#include "biaskit/stats/special.hpp"
#include "oracles.hpp"

using namespace biaskit;
using namespace biaskit::stats;
using doctest::Approx;

namespace {

double closed_form_chi2(const Contingency2x2& t) {
  const double a = double(t[0][0]), b = double(t[0][1]), c = double(t[1][0]), d = double(t[1][1]);
  const double n = a + b + c + d;
  return n * (a * d - b * c) * (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d));
}

TextObservation text(Venue v, Race6 race, int year = 2015) {
  TextObservation t;
  t.venue = v;
  t.race = race;
  t.year = year;
  return t;
}

}  // namespace

TEST_CASE("chi2_2x2 on homogeneous and hand-computed tables") {
  auto flat = chi2_2x2({{{10, 10}, {10, 10}}});
  CHECK(flat.statistic == Approx(0.0));
  CHECK(flat.p_value == Approx(1.0));

  auto r = chi2_2x2({{{20, 10}, {10, 20}}});
  CHECK(r.statistic == Approx(20.0 / 3.0).epsilon(1e-12));
  CHECK(r.dof == 1.0);
  CHECK(std::abs(r.p_value - 0.0098) < 1e-4);
  CHECK(std::abs(r.p_value - oracle::chi2_1_survival(r.statistic)) < 1e-9);
}

TEST_CASE("chi2_2x2 rejects zero marginals") {
  CHECK_THROWS_AS(chi2_2x2({{{0, 0}, {3, 4}}}), TestUndefined);
  CHECK_THROWS_AS(chi2_2x2({{{0, 5}, {0, 4}}}), TestUndefined);
}

TEST_CASE("chi2_2x2 is invariant under simultaneous row and column swaps") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Contingency2x2 t;
    for (auto& row : t)
      for (auto& c : row) c = std::int64_t(rng.below(50)) + 1;
    Contingency2x2 swapped{{{t[1][1], t[1][0]}, {t[0][1], t[0][0]}}};
    CHECK(chi2_2x2(t).statistic == Approx(chi2_2x2(swapped).statistic).epsilon(1e-12));
  }
  // proportional rows give zero
  CHECK(chi2_2x2({{{3, 6}, {10, 20}}}).statistic == Approx(0.0));
}

TEST_CASE("chi2_2x2 statistic and p match closed form and quadrature over random tables") {
  Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    Contingency2x2 t;
    for (auto& row : t)
      for (auto& c : row) c = std::int64_t(rng.below(200)) + 1;
    auto r = chi2_2x2(t);
    REQUIRE(r.statistic == Approx(closed_form_chi2(t)).epsilon(1e-10));
    REQUIRE(std::abs(r.p_value - oracle::chi2_1_survival(r.statistic)) < 1e-6);
  }
}

TEST_CASE("chi2_independence reduces to the 2x2 test and drops empty columns") {
  auto a = chi2_independence({{20, 10, 0}, {10, 20, 0}});
  CHECK(a.dof == 1.0);
  CHECK(a.statistic == Approx(20.0 / 3.0));
  CHECK(a.p_value == Approx(chi2_2x2({{{20, 10}, {10, 20}}}).p_value).epsilon(1e-12));
  auto b = chi2_independence({{10, 20, 30}, {30, 20, 10}});
  CHECK(b.dof == 2.0);
  // chi2(2) survival is exp(-x/2)
  CHECK(b.p_value == Approx(std::exp(-b.statistic / 2)).epsilon(1e-12));
  CHECK_THROWS_AS(chi2_independence({{1, 2}, {0, 0}}), TestUndefined);
}

TEST_CASE("welch_t on identical and shifted samples") {
  std::vector<double> a{1, 2, 3};
  auto same = welch_t(a, a);
  CHECK(same.statistic == Approx(0.0));
  CHECK(same.p_value == Approx(1.0));

  // means 2.5 and 4.5, variances 5/3: t = -2 / sqrt(5/6)
  std::vector<double> xs{1, 2, 3, 4}, ys{3, 4, 5, 6};
  auto r = welch_t(xs, ys);
  CHECK(r.statistic == Approx(-2.0 / std::sqrt(5.0 / 6.0)).epsilon(1e-12));
  CHECK(r.statistic == Approx(-2.19089023).epsilon(1e-8));
  CHECK(r.dof == Approx(6.0));
  CHECK(std::abs(r.p_value - oracle::student_t_two_sided(r.statistic, r.dof)) < 1e-9);
  CHECK(std::abs(r.p_value - 0.0709876543) < 1e-8);

  std::vector<double> zeros{0, 0};
  CHECK_THROWS_AS(welch_t(zeros, zeros), TestUndefined);
  std::vector<double> one{1};
  CHECK_THROWS_AS(welch_t(one, a), TestUndefined);
}

TEST_CASE("welch_t is antisymmetric in its arguments") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> xs(2 + rng.below(10)), ys(2 + rng.below(10));
    for (auto& x : xs) x = rng.normal();
    for (auto& y : ys) y = rng.normal() + 0.5;
    auto f = welch_t(xs, ys), b = welch_t(ys, xs);
    CHECK(f.statistic == Approx(-b.statistic).epsilon(1e-12));
    CHECK(f.p_value == Approx(b.p_value).epsilon(1e-12));
  }
}

TEST_CASE("t-test p-values match quadrature over random samples") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> xs(2 + rng.below(30)), ys(2 + rng.below(30));
    const double shift = rng.uniform() * 2.0;
    for (auto& x : xs) x = rng.normal() * (0.5 + rng.uniform());
    for (auto& y : ys) y = rng.normal() * (0.5 + rng.uniform()) + shift;
    auto w = welch_t(xs, ys);
    REQUIRE(std::abs(w.p_value - oracle::student_t_two_sided(w.statistic, w.dof)) < 1e-6);
    auto p = pooled_t(xs, ys);
    REQUIRE(p.dof == double(xs.size() + ys.size() - 2));
    REQUIRE(std::abs(p.p_value - oracle::student_t_two_sided(p.statistic, p.dof)) < 1e-6);
  }
}

TEST_CASE("pooled_t equals welch_t when sample sizes match") {
  std::vector<double> xs{1, 2, 3, 4}, ys{3, 4, 5, 7};
  CHECK(pooled_t(xs, ys).statistic == Approx(welch_t(xs, ys).statistic).epsilon(1e-12));
}

TEST_CASE("star_format thresholds and monotonicity") {
  CHECK(star_format(0.2) == Stars::ns);
  CHECK(star_format(0.05) == Stars::ns);
  CHECK(star_format(0.049) == Stars::p05);
  CHECK(star_format(0.0005) == Stars::p001);
  CHECK(star_format(0.00005) == Stars::p0001);
  CHECK(to_string(Stars::p0001) == "****");
  int prev = 0;
  for (double p = 1.0; p > 1e-7; p *= 0.97) {
    const int level = int(star_format(p));
    CHECK(level >= prev);
    prev = level;
  }
}

TEST_CASE("special functions at known values") {
  CHECK(incomplete_beta(1, 1, 0.3) == Approx(0.3).epsilon(1e-14));
  CHECK(incomplete_beta(2, 3, 0.4) == Approx(0.5248).epsilon(1e-12));
  // t with 1 dof is Cauchy: two-sided p = 1 - 2 atan(t)/pi
  CHECK(student_t_two_sided_p(1.7, 1.0) == Approx(1.0 - 2.0 * std::atan(1.7) / M_PI).epsilon(1e-12));
  CHECK(chi2_sf(3.0, 4.0) == Approx(std::exp(-1.5) * 2.5).epsilon(1e-12));
  CHECK(chi2_1_sf(0.0) == 1.0);
}

TEST_CASE("group_proportions per venue and category") {
  std::vector<GroupObservation<Gender>> obs;
  for (int i = 0; i < 89; ++i) obs.push_back({Venue::FOX, Category::Sport, Gender::Male});
  for (int i = 0; i < 11; ++i) obs.push_back({Venue::FOX, Category::Sport, Gender::Female});
  obs.push_back({Venue::NYT, Category::Art, Gender::Female});
  auto cells = group_proportions<Gender>(obs);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].venue == Venue::NYT);
  CHECK(cells[0].proportions[index_of(Gender::Female)] == 1.0);
  CHECK(cells[1].proportions[index_of(Gender::Male)] == Approx(0.89));

  std::vector<GroupObservation<Race6>> races;
  for (Race6 r : all_labels<Race6>())
    for (int i = 0; i < 2; ++i) races.push_back({Venue::NYT, Category::US, r});
  auto rc = group_proportions<Race6>(races);
  REQUIRE(rc.size() == 1);
  double sum = 0;
  for (double p : rc[0].proportions) {
    CHECK(p == Approx(1.0 / 6.0));
    sum += p;
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("representation_tests build venue x (group vs rest) tables") {
  std::vector<GroupObservation<Gender>> obs;
  auto add = [&](Venue v, Gender g, int n) {
    for (int i = 0; i < n; ++i) obs.push_back({v, Category::Sport, g});
  };
  add(Venue::NYT, Gender::Male, 20);
  add(Venue::NYT, Gender::Female, 10);
  add(Venue::FOX, Gender::Male, 10);
  add(Venue::FOX, Gender::Female, 20);
  auto cells = group_proportions<Gender>(obs);
  auto res = representation_tests(cells, Chi2Mode::GroupVsRest);
  REQUIRE(res.size() == 2);
  CHECK(res[0].statistic == Approx(20.0 / 3.0));
  CHECK(res[0].stars == Stars::p01);
  CHECK(res[0].estimates[0] == Approx(2.0 / 3.0));
  auto full = representation_tests(cells, Chi2Mode::Full);
  REQUIRE(full.size() == 1);
  CHECK(full[0].statistic == Approx(20.0 / 3.0));

  // a category seen at one venue only cannot be tested
  std::vector<GroupObservation<Gender>> lone{{Venue::NYT, Category::Food, Gender::Male}};
  auto undefined = representation_tests(group_proportions<Gender>(lone), Chi2Mode::GroupVsRest);
  REQUIRE(undefined.size() == 2);
  CHECK_FALSE(undefined[0].defined);
}

TEST_CASE("area_tests compares venues per group") {
  std::vector<FaceObservation> faces;
  auto add = [&](Venue v, Race6 r, Gender g, double z) {
    FaceObservation f;
    f.venue = v;
    f.race = r;
    f.gender = g;
    f.area_z = z;
    faces.push_back(f);
  };
  for (double z : {1.0, 2.0, 3.0, 4.0}) add(Venue::NYT, Race6::White, Gender::Male, z);
  for (double z : {3.0, 4.0, 5.0, 6.0}) add(Venue::FOX, Race6::White, Gender::Male, z);
  auto res = area_tests(faces, false);
  REQUIRE(res.size() == 8);
  CHECK(res[5].keys[1].second == "White");
  CHECK(res[5].statistic == Approx(-2.19089023).epsilon(1e-8));
  CHECK(res[5].estimates[0] == Approx(2.5));
  CHECK_FALSE(res[0].defined);
  CHECK(res[6].keys[0].second == "gender");
}

TEST_CASE("emotion shares over non-neutral records") {
  std::vector<TextObservation> recs;
  for (Emotion e : all_labels<Emotion>()) {
    auto t = text(Venue::NYT, Race6::Black);
    t.emotion = e;
    recs.push_back(t);
  }
  auto nn = filter_non_neutral(recs);
  CHECK(nn.size() == 6);
  auto cells = emotion_shares(nn);
  REQUIRE(cells.size() == 1);
  double sum = 0;
  for (Emotion e : all_labels<Emotion>()) {
    if (e == Emotion::Neutral) continue;
    CHECK(cells[0].shares[index_of(e)] == Approx(1.0 / 6.0));
    sum += cells[0].shares[index_of(e)];
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
  CHECK_THROWS_AS(emotion_shares(recs), InvalidInput);
  CHECK(emotion_counts(recs)[Venue::NYT][index_of(Emotion::Neutral)] == 1);

  std::vector<TextObservation> anger;
  for (int i = 0; i < 3; ++i) {
    auto t = text(Venue::FOX, Race6::Asian);
    t.emotion = Emotion::Anger;
    anger.push_back(t);
  }
  CHECK(emotion_shares(anger)[0].shares[index_of(Emotion::Anger)] == 1.0);
}

TEST_CASE("emotion_tests yield one result per race and non-neutral emotion") {
  std::vector<TextObservation> recs;
  auto add = [&](Venue v, Emotion e, int n) {
    for (int i = 0; i < n; ++i) {
      auto t = text(v, Race6::Latinx);
      t.emotion = e;
      recs.push_back(t);
    }
  };
  add(Venue::NYT, Emotion::Anger, 20);
  add(Venue::NYT, Emotion::Joy, 10);
  add(Venue::FOX, Emotion::Anger, 10);
  add(Venue::FOX, Emotion::Joy, 20);
  auto res = emotion_tests(emotion_shares(recs));
  REQUIRE(res.size() == 6);
  const auto& anger = res[index_of(Emotion::Anger) - 1];
  CHECK(anger.keys[1].second == "Anger");
  CHECK(anger.statistic == Approx(20.0 / 3.0));
  CHECK_FALSE(res[0].defined);  // Disgust never occurs
}

TEST_CASE("sentiment balance") {
  CHECK(sentiment_balance(7, 7) == 0.0);
  CHECK(sentiment_balance(55, 45) == Approx(10.0));
  CHECK(sentiment_balance(45, 55) == Approx(-10.0));
  CHECK(sentiment_balance(3, 0) == 100.0);
  CHECK_THROWS_AS(sentiment_balance(0, 0), Undefined);

  std::vector<TextObservation> recs;
  auto add = [&](Venue v, Race6 r, int year, Sentiment s, int n) {
    for (int i = 0; i < n; ++i) {
      auto t = text(v, r, year);
      t.sentiment = s;
      recs.push_back(t);
    }
  };
  add(Venue::NYT, Race6::Black, 2013, Sentiment::Positive, 6);
  add(Venue::NYT, Race6::Black, 2014, Sentiment::Negative, 4);
  add(Venue::NYT, Race6::White, 2014, Sentiment::Negative, 1);
  auto cells = sentiment_table(recs);
  REQUIRE(cells.size() == 5);
  CHECK_FALSE(cells[0].year);
  CHECK(cells[0].balance == Approx(20.0));
  CHECK(*cells[1].year == 2013);
  CHECK(cells[1].balance == 100.0);
  CHECK(mean_abs_balance(cells)[Venue::NYT] == Approx(60.0));
}

TEST_CASE("topic race shares, top association and topic distribution") {
  std::vector<TextObservation> recs;
  auto add = [&](Venue v, Topic topic, Race6 r, int n) {
    for (int i = 0; i < n; ++i) {
      auto t = text(v, r);
      t.topic = topic;
      recs.push_back(t);
    }
  };
  add(Venue::NYT, Topic::Terrorism, Race6::MiddleEastern, 19);
  add(Venue::NYT, Topic::Terrorism, Race6::White, 1);
  add(Venue::NYT, Topic::War, Race6::MiddleEastern, 3);
  add(Venue::NYT, Topic::War, Race6::White, 7);
  auto res = topic_race_shares(recs);
  REQUIRE(res.cells.size() == 2);
  CHECK(res.cells[0].topic == Topic::Terrorism);
  CHECK(res.cells[0].shares[index_of(Race6::MiddleEastern)] == Approx(0.95));
  REQUIRE(res.top.size() == 1);
  CHECK(res.top[0].race == Race6::MiddleEastern);
  CHECK(res.top[0].topic == Topic::Terrorism);

  auto dist = race_topic_distribution(recs);
  REQUIRE(dist.size() == 2);
  for (const auto& d : dist) {
    const double total = std::accumulate(d.percent.begin(), d.percent.end(), 0.0);
    CHECK(std::abs(total - 100.0) < 0.1);
  }
  CHECK(dist[0].race == Race6::MiddleEastern);
  CHECK(dist[0].percent[index_of(Topic::Terrorism)] == Approx(100.0 * 19 / 22));

  std::vector<TextObservation> single;
  add(Venue::FOX, Topic::Health, Race6::Asian, 1);
  single.push_back(recs.back());
  CHECK(topic_race_shares(single).cells[0].shares[index_of(Race6::Asian)] == 1.0);
}

TEST_CASE("temporal series leaves gaps and recovers planted drift") {
  std::vector<TextObservation> recs;
  for (int year = 2012; year <= 2022; ++year) {
    if (year == 2016) continue;
    const double planted = 0.2 + 0.6 * (year - 2012) / 10.0;
    const int hits = int(std::lround(planted * 1000));
    for (int i = 0; i < 1000; ++i) {
      auto t = text(Venue::FOX, i < hits ? Race6::MiddleEastern : Race6::White, year);
      t.topic = Topic::War;
      recs.push_back(t);
    }
  }
  auto series = temporal_topic_series(recs, Topic::War, Race6::MiddleEastern);
  REQUIRE(series.size() == 22);
  for (const auto& p : series) {
    if (p.venue == Venue::NYT || p.year == 2016) {
      CHECK_FALSE(p.share);
      continue;
    }
    const double planted = 0.2 + 0.6 * (p.year - 2012) / 10.0;
    REQUIRE(p.share);
    CHECK(std::abs(*p.share - planted) <= 0.02);
  }
}

TEST_CASE("temporal series drift sampled at n=1000 stays within three standard errors") {
  Rng rng(99);
  std::vector<TextObservation> recs;
  for (int year = 2012; year <= 2022; ++year) {
    const double planted = 0.2 + 0.6 * (year - 2012) / 10.0;
    for (int i = 0; i < 1000; ++i) {
      auto t = text(Venue::NYT, rng.uniform() < planted ? Race6::MiddleEastern : Race6::Black, year);
      t.topic = Topic::War;
      recs.push_back(t);
    }
  }
  for (const auto& p : temporal_topic_series(recs, Topic::War, Race6::MiddleEastern)) {
    if (p.venue != Venue::NYT) continue;
    const double planted = 0.2 + 0.6 * (p.year - 2012) / 10.0;
    CHECK(std::abs(*p.share - planted) <= 3.0 * std::sqrt(planted * (1 - planted) / 1000.0));
  }
}

TEST_CASE("vp_matrix rows normalize over perpetrator races") {
  using annotate::VpRole;
  std::vector<TextObservation> recs;
  auto add = [&](Venue v, VpRole victim, VpRole perp, int n) {
    for (int i = 0; i < n; ++i) {
      TextObservation t;
      t.venue = v;
      t.vp = annotate::VictimPerpRecord{victim, perp};
      recs.push_back(t);
    }
  };
  add(Venue::NYT, VpRole::Black, VpRole::White, 3);
  add(Venue::NYT, VpRole::Black, VpRole::Black, 1);
  add(Venue::NYT, VpRole::Black, VpRole::Unspecified, 4);
  add(Venue::NYT, VpRole::Absent, VpRole::White, 9);
  add(Venue::FOX, VpRole::Asian, VpRole::Asian, 1);

  auto m = vp_matrix(recs, false);
  REQUIRE(m.size() == 2);
  const auto& black = m[0].values[index_of(Race6::Black)];
  CHECK(*black[index_of(Race6::White)] == Approx(0.75));
  CHECK(*black[index_of(Race6::Black)] == Approx(0.25));
  CHECK_FALSE(m[0].values[index_of(Race6::Asian)][0]);
  CHECK(*m[1].values[index_of(Race6::Asian)][index_of(Race6::Asian)] == 1.0);

  auto wide = vp_matrix(recs, true);
  CHECK(wide[0].columns.back() == "Unspecified");
  const auto& row = wide[0].values[index_of(Race6::Black)];
  CHECK(*row.back() == Approx(0.5));
  double sum = 0;
  for (const auto& v : row) sum += *v;
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("mean_age from bracket counts") {
  CHECK(mean_age({0, 0, 5, 0, 0}) == 29.5);
  CHECK(mean_age({1, 1, 1, 1, 1}) == Approx(33.6));
  CHECK_THROWS_AS(mean_age({0, 0, 0, 0, 0}), Undefined);
}
