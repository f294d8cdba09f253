#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "biaskit/core/error.hpp"
#include "biaskit/metrics/metrics.hpp"
#include "oracles.hpp"

using namespace biaskit;
using namespace biaskit::metrics;

namespace {

std::vector<Label> L(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

RaterTable table_from(const std::vector<std::vector<std::optional<std::string>>>& rows) {
  RaterTable t(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t r = 0; r < rows[i].size(); ++r) t.set(i, r, rows[i][r]);
  return t;
}

}  // namespace

TEST_CASE("confusion counts true rows against predicted columns") {
  auto cm = confusion(L({"A", "B", "A"}), L({"A", "B", "A"}));
  REQUIRE(cm.labels == L({"A", "B"}));
  CHECK(cm.counts[0][0] == 2);
  CHECK(cm.counts[1][1] == 1);
  CHECK(cm.counts[0][1] == 0);
  CHECK(cm.counts[1][0] == 0);

  auto off = confusion(L({"A", "A"}), L({"B", "B"}));
  CHECK(off.counts[*off.index_of("A")][*off.index_of("B")] == 2);

  std::mt19937 gen(3);
  std::vector<Label> t, p;
  for (int i = 0; i < 200; ++i) {
    t.push_back(std::string(1, char('A' + gen() % 4)));
    p.push_back(std::string(1, char('A' + gen() % 4)));
  }
  CHECK(confusion(t, p).total() == 200);

  CHECK_THROWS_AS(confusion(L({"A"}), L({"A", "B"})), InvalidInput);
  CHECK_THROWS_AS(confusion(L({"A"}), L({"C"}), L({"A", "B"})), InvalidInput);
}

TEST_CASE("class_report hand example") {
  ConfusionMatrix cm{L({"A", "B"}), {{8, 2}, {4, 6}}};
  auto r = class_report(cm);
  CHECK(r.per_class[0].precision == doctest::Approx(8.0 / 12.0));
  CHECK(r.per_class[0].recall == doctest::Approx(0.8));
  CHECK(r.accuracy == doctest::Approx(0.7));
  CHECK(r.per_class[0].support == 10);
}

TEST_CASE("class_report perfect diagonal and zero-denominator convention") {
  ConfusionMatrix perfect{L({"A", "B", "C"}), {{3, 0, 0}, {0, 5, 0}, {0, 0, 1}}};
  auto r = class_report(perfect);
  for (const auto& m : r.per_class) {
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  CHECK(r.macro_avg.f1 == 1.0);
  CHECK(r.weighted_avg.f1 == 1.0);
  CHECK(r.accuracy == 1.0);

  // C is never predicted: precision 0, still averaged in macro
  ConfusionMatrix never{L({"A", "C"}), {{4, 0}, {2, 0}}};
  auto r2 = class_report(never);
  CHECK(r2.per_class[1].precision == 0.0);
  CHECK(r2.per_class[1].f1 == 0.0);
  CHECK(r2.macro_avg.precision == doctest::Approx((4.0 / 6.0 + 0.0) / 2.0));

  CHECK_THROWS_AS(class_report(ConfusionMatrix{L({"A"}), {{0}}}), InvalidInput);
  CHECK_THROWS_AS(class_report(ConfusionMatrix{}), InvalidInput);
}

TEST_CASE("class_report of y against itself is perfect") {
  std::mt19937 gen(11);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Label> y;
    const int n = 1 + int(gen() % 30);
    for (int i = 0; i < n; ++i) y.push_back(std::string(1, char('a' + gen() % 5)));
    auto r = class_report(confusion(y, y));
    CHECK(r.accuracy == 1.0);
    for (const auto& m : r.per_class) CHECK(m.f1 == 1.0);
  }
}

TEST_CASE("macro F1 ignores support rebalancing, weighted F1 does not") {
  // Growing class A's support 50x keeps every per-class precision and
  // recall, so macro F1 is unchanged while the support weights move.
  ConfusionMatrix d1{L({"A", "B", "C"}), {{1, 0, 0}, {0, 3, 1}, {0, 1, 3}}};
  ConfusionMatrix d2{L({"A", "B", "C"}), {{50, 0, 0}, {0, 3, 1}, {0, 1, 3}}};
  auto e1 = class_report(d1);
  auto e2 = class_report(d2);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(e1.per_class[c].precision == doctest::Approx(e2.per_class[c].precision));
    CHECK(e1.per_class[c].recall == doctest::Approx(e2.per_class[c].recall));
  }
  CHECK(e1.macro_avg.f1 == doctest::Approx(e2.macro_avg.f1));
  CHECK(e1.weighted_avg.f1 == doctest::Approx(7.0 / 9.0));
  CHECK(e2.weighted_avg.f1 == doctest::Approx(56.0 / 58.0));
}

TEST_CASE("cohens_kappa hand examples") {
  CHECK(cohens_kappa(L({"A", "B", "A", "C"}), L({"A", "B", "A", "C"})) == 1.0);
  CHECK(cohens_kappa(L({"A", "A", "B", "B"}), L({"A", "B", "A", "B"})) == 0.0);
  CHECK(cohens_kappa(L({"A", "A", "A", "B"}), L({"A", "A", "B", "B"})) == 0.5);
  CHECK(cohens_kappa(L({"A", "A"}), L({"A", "A"})) == 1.0);
  CHECK_THROWS_AS(cohens_kappa(L({"A"}), L({"A", "B"})), InvalidInput);
  CHECK_THROWS_AS(cohens_kappa(L({}), L({})), InvalidInput);
}

TEST_CASE("cohens_kappa is symmetric") {
  std::mt19937 gen(5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Label> a, b;
    const int n = 1 + int(gen() % 12);
    for (int i = 0; i < n; ++i) {
      a.push_back(std::string(1, char('A' + gen() % 3)));
      b.push_back(std::string(1, char('A' + gen() % 3)));
    }
    CHECK(cohens_kappa(a, b) == doctest::Approx(cohens_kappa(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("krippendorff_alpha hand examples") {
  using R = std::vector<std::vector<std::optional<std::string>>>;
  CHECK(krippendorff_alpha(table_from(R{{"A", "A", "A"}, {"B", "B", "B"}, {"A", "A", "A"}})) == 1.0);

  // frozen from the enumeration oracle: 1 - 7 * 2 / 30
  R four{{"A", "A"}, {"A", "A"}, {"B", "B"}, {"A", "B"}};
  const double frozen = 8.0 / 15.0;
  CHECK(oracle::krippendorff_alpha(four) == doctest::Approx(frozen).epsilon(1e-12));
  CHECK(krippendorff_alpha(table_from(four)) == doctest::Approx(frozen).epsilon(1e-12));

  // an item rated once is dropped; result equals the table without it
  R with_single = four;
  with_single.push_back({"B", std::nullopt});
  CHECK(krippendorff_alpha(table_from(with_single)) == doctest::Approx(frozen).epsilon(1e-12));

  CHECK_THROWS_AS(krippendorff_alpha(table_from(R{{"A", std::nullopt}, {std::nullopt, "B"}})), Undefined);
}

TEST_CASE("krippendorff_alpha is invariant under label renaming") {
  std::mt19937 gen(9);
  const std::map<std::string, std::string> rename{{"A", "zeta"}, {"B", "alpha"}, {"C", "mid"}};
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<std::optional<std::string>>> rows, renamed;
    for (int i = 0; i < 8; ++i) {
      std::vector<std::optional<std::string>> row, row2;
      for (int r = 0; r < 3; ++r) {
        if (gen() % 5 == 0) {
          row.push_back(std::nullopt);
          row2.push_back(std::nullopt);
        } else {
          std::string v(1, char('A' + gen() % 3));
          row.push_back(v);
          row2.push_back(rename.at(v));
        }
      }
      rows.push_back(row);
      renamed.push_back(row2);
    }
    try {
      const double a = krippendorff_alpha(table_from(rows));
      CHECK(a == doctest::Approx(krippendorff_alpha(table_from(renamed))).epsilon(1e-12));
    } catch (const Undefined&) {
    }
  }
}

TEST_CASE("majority_vote and agreement_accuracy") {
  CHECK(majority_vote(L({"A", "A", "A", "B", "B"})) == std::optional<Label>("A"));
  CHECK(majority_vote(L({"A", "A", "B", "B"})) == std::nullopt);
  CHECK(majority_vote(L({"A"})) == std::optional<Label>("A"));
  CHECK(majority_vote(L({"A", "A", "B", "B", "C"})) == std::nullopt);
  CHECK(majority_vote(L({"C", "A", "A", "B", "C", "A"})) == std::optional<Label>("A"));
  CHECK_THROWS_AS(majority_vote(L({})), InvalidInput);

  std::vector<std::optional<Label>> votes{"A", "B", "C", "D"};
  CHECK(agreement_accuracy(votes, L({"A", "B", "C", "D"})) == 1.0);
  CHECK(agreement_accuracy(votes, L({"A", "B", "X", "Y"})) == 0.5);

  std::vector<std::optional<Label>> many(200, Label("A"));
  std::vector<Label> preds(200, "A");
  for (int i = 140; i < 200; ++i) preds[i] = "B";
  CHECK(agreement_accuracy(many, preds) == doctest::Approx(0.70));

  std::vector<std::optional<Label>> with_ties{"A", std::nullopt, "B"};
  CHECK(agreement_accuracy(with_ties, L({"A", "A", "C"})) == 0.5);
  std::vector<std::optional<Label>> all_ties{std::nullopt};
  CHECK_THROWS_AS(agreement_accuracy(all_ties, L({"A"})), Undefined);
  CHECK_THROWS_AS(agreement_accuracy(votes, L({"A"})), InvalidInput);
}

TEST_CASE("brute-force equivalence on random small instances") {
  std::mt19937_64 gen(20240611);
  int alpha_checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + int(gen() % 12);
    const int k = 1 + int(gen() % 4);
    std::vector<Label> yt, yp;
    for (int i = 0; i < n; ++i) {
      yt.push_back(std::string(1, char('A' + gen() % k)));
      yp.push_back(std::string(1, char('A' + gen() % k)));
    }
    auto cm = confusion(yt, yp);
    auto rep_lib = class_report(cm);
    auto rep_or = oracle::class_report(yt, yp, cm.labels);
    for (std::size_t c = 0; c < cm.size(); ++c) {
      CHECK(std::fabs(rep_lib.per_class[c].precision - rep_or.precision[c]) < 1e-9);
      CHECK(std::fabs(rep_lib.per_class[c].recall - rep_or.recall[c]) < 1e-9);
      CHECK(std::fabs(rep_lib.per_class[c].f1 - rep_or.f1[c]) < 1e-9);
    }
    CHECK(std::fabs(rep_lib.macro_avg.f1 - rep_or.macro_f1) < 1e-9);
    CHECK(std::fabs(rep_lib.weighted_avg.f1 - rep_or.weighted_f1) < 1e-9);
    CHECK(std::fabs(rep_lib.accuracy - rep_or.accuracy) < 1e-9);
    CHECK(std::fabs(cohens_kappa(yt, yp) - oracle::cohens_kappa(yt, yp)) < 1e-9);

    const int raters = 2 + int(gen() % 4);
    std::vector<std::vector<std::optional<std::string>>> rows;
    for (int i = 0; i < n; ++i) {
      std::vector<std::optional<std::string>> row;
      for (int r = 0; r < raters; ++r) {
        if (gen() % 4 == 0) row.push_back(std::nullopt);
        else row.push_back(std::string(1, char('A' + gen() % k)));
      }
      rows.push_back(row);
    }
    try {
      const double a = krippendorff_alpha(table_from(rows));
      CHECK(std::fabs(a - oracle::krippendorff_alpha(rows)) < 1e-9);
      ++alpha_checked;
    } catch (const Undefined&) {
    }
  }
  CHECK(alpha_checked > 900);
}
