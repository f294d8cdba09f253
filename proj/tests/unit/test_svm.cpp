#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "biaskit/core/rng.hpp"
#include "biaskit/svm/ensemble.hpp"
#include "biaskit/svm/svm.hpp"
#include "oracles.hpp"

using namespace biaskit;
using namespace biaskit::svm;
using doctest::Approx;

namespace {

struct Dataset {
  FeatureMatrix x;
  std::vector<std::size_t> y;
  std::vector<std::vector<double>> centers;
};

Dataset blobs(std::size_t classes, std::size_t per_class, std::size_t dim, double separation, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  d.x = FeatureMatrix(dim);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> center(dim);
    for (auto& v : center) v = rng.normal();
    double norm = std::sqrt(std::inner_product(center.begin(), center.end(), center.begin(), 0.0));
    for (auto& v : center) v *= separation / norm;
    d.centers.push_back(center);
  }
  // interleave classes so no class forms a contiguous block
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      std::vector<float> row(dim);
      for (std::size_t k = 0; k < dim; ++k) row[k] = float(d.centers[c][k] + rng.normal());
      d.x.push_row(row);
      d.y.push_back(c);
    }
  }
  return d;
}

std::vector<std::string> names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::string(1, char('A' + i)));
  return out;
}

double rbf(std::span<const float> a, std::span<const float> b, double gamma) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return std::exp(-gamma * d);
}

// Worst KKT violation of each machine, recomputed from the stored dual
// coefficients against the training data.
double max_kkt_violation(const SvmModel& m, const FeatureMatrix& x, std::span<const std::size_t> labels) {
  double worst = 0;
  for (const auto& mc : m.machines) {
    std::vector<double> alpha_y(x.rows, 0.0);
    for (std::size_t i = 0; i < mc.sv.size(); ++i) alpha_y[m.sv_train_index[mc.sv[i]]] = mc.coef[i];
    for (std::size_t i = 0; i < x.rows; ++i) {
      if (labels[i] != mc.positive && labels[i] != mc.negative) continue;
      const double yi = labels[i] == mc.positive ? 1.0 : -1.0;
      double f = -mc.rho;
      for (std::size_t j = 0; j < x.rows; ++j)
        if (alpha_y[j] != 0) f += alpha_y[j] * rbf(x.row(j), x.row(i), m.gamma);
      const double margin = yi * f;
      const double alpha = std::abs(alpha_y[i]);
      if (alpha == 0) worst = std::max(worst, 1.0 - margin);
      else if (alpha >= m.c) worst = std::max(worst, margin - 1.0);
      else worst = std::max(worst, std::abs(margin - 1.0));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("XOR points are separated with an RBF kernel") {
  FeatureMatrix x(2);
  const std::vector<std::vector<float>> pts{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  for (const auto& p : pts) x.push_row(p);
  std::vector<std::size_t> y{0, 0, 1, 1};
  TrainParams p;
  p.c = 10;
  p.gamma = 1;
  auto m = train_svm(x, y, names(2), p);
  REQUIRE(m.machines.size() == 1);

  std::vector<std::vector<double>> xs;
  for (const auto& pt : pts) xs.push_back({pt[0], pt[1]});
  auto oracle_signs = oracle::rbf_perceptron(xs, {1, 1, -1, -1}, 1.0, xs);
  REQUIRE(oracle_signs);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(predict_label(m, x.row(i)) == y[i]);
    CHECK((*oracle_signs)[i] == (y[i] == 0 ? 1 : -1));
  }
  CHECK(max_kkt_violation(m, x, y) <= 1e-3);
}

TEST_CASE("well separated 2-D blobs are fit perfectly") {
  auto d = blobs(2, 30, 2, 10.0, 17);
  // hand-chosen separator: the perpendicular bisector of the two centers
  std::vector<double> w(2), mid(2);
  for (int k = 0; k < 2; ++k) {
    w[k] = d.centers[0][k] - d.centers[1][k];
    mid[k] = (d.centers[0][k] + d.centers[1][k]) / 2;
  }
  for (std::size_t i = 0; i < d.x.rows; ++i) {
    const double s = w[0] * (d.x.row(i)[0] - mid[0]) + w[1] * (d.x.row(i)[1] - mid[1]);
    REQUIRE((s > 0) == (d.y[i] == 0));
  }
  auto m = train_svm(d.x, d.y, names(2), {});
  for (std::size_t i = 0; i < d.x.rows; ++i) {
    CHECK(predict_label(m, d.x.row(i)) == d.y[i]);
    auto probs = predict_probs(m, d.x.row(i));
    CHECK(std::size_t(std::max_element(probs.begin(), probs.end()) - probs.begin()) == d.y[i]);
  }
  CHECK(max_kkt_violation(m, d.x, d.y) <= 1e-3);
}

TEST_CASE("training rejects degenerate input") {
  FeatureMatrix x(2);
  x.push_row(std::vector<float>{0, 0});
  x.push_row(std::vector<float>{1, 1});
  std::vector<std::size_t> same{0, 0};
  CHECK_THROWS_AS(train_svm(x, same, names(2), {}), DegenerateTraining);

  FeatureMatrix bad(2);
  bad.push_row(std::vector<float>{0, NAN});
  bad.push_row(std::vector<float>{1, 1});
  std::vector<std::size_t> two{0, 1};
  CHECK_THROWS_AS(train_svm(bad, two, names(2), {}), InvalidFeature);

  TrainParams neg;
  neg.c = -1;
  CHECK_THROWS_AS(train_svm(x, two, names(2), neg), ConfigurationError);
  CHECK_THROWS_AS(x.push_row(std::vector<float>{1, 2, 3}), InvalidFeature);
}

TEST_CASE("multiclass probabilities are normalized and pick the right blob") {
  auto d = blobs(4, 25, 8, 8.0, 3);
  auto m = train_svm(d.x, d.y, names(4), {});
  CHECK(m.machines.size() == 6);
  CHECK(max_kkt_violation(m, d.x, d.y) <= 1e-3);
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<float> q(8);
    for (auto& v : q) v = float(rng.normal() * 6);
    auto p = predict_probs(m, q);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-6);
    for (double v : p) CHECK(v >= 0);
  }
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<float> center(d.centers[c].begin(), d.centers[c].end());
    auto p = predict_probs(m, center);
    const auto arg = std::size_t(std::max_element(p.begin(), p.end()) - p.begin());
    CHECK(arg == c);
    CHECK(arg == oracle::nearest_centroid(d.centers, d.centers[c]));
    CHECK(p[c] > 0.9);
  }
  std::vector<float> wrong(7, 0.f);
  CHECK_THROWS_AS(predict_probs(m, wrong), InvalidFeature);
}

TEST_CASE("absent classes get zero probability") {
  auto d = blobs(3, 10, 4, 8.0, 5);
  auto m = train_svm(d.x, d.y, names(5), {});
  CHECK(m.machines.size() == 3);
  auto p = predict_probs(m, d.x.row(0));
  CHECK(p.size() == 5);
  CHECK(p[3] == 0.0);
  CHECK(p[4] == 0.0);
}

TEST_CASE("mirrored data with swapped labels gives mirrored probabilities") {
  auto d = blobs(2, 20, 3, 4.0, 23);
  FeatureMatrix mirrored(3);
  std::vector<std::size_t> swapped;
  for (std::size_t i = 0; i < d.x.rows; ++i) {
    std::vector<float> r(d.x.row(i).begin(), d.x.row(i).end());
    for (auto& v : r) v = -v;
    mirrored.push_row(r);
    swapped.push_back(1 - d.y[i]);
  }
  auto m = train_svm(d.x, d.y, names(2), {});
  auto mm = train_svm(mirrored, swapped, names(2), {});
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<float> q(3), nq(3);
    for (int k = 0; k < 3; ++k) {
      q[k] = float(rng.normal() * 3);
      nq[k] = -q[k];
    }
    auto p = predict_probs(m, q);
    auto pm = predict_probs(mm, nq);
    CHECK(pm[0] == Approx(p[1]).epsilon(1e-9));
    CHECK(pm[1] == Approx(p[0]).epsilon(1e-9));
  }
}

TEST_CASE("probabilities are equivariant under relabeling of the classes") {
  auto d = blobs(3, 15, 2, 3.0, 31);
  const std::array<std::size_t, 3> perm{2, 0, 1};
  std::vector<std::size_t> relabeled;
  for (auto l : d.y) relabeled.push_back(perm[l]);
  auto m = train_svm(d.x, d.y, names(3), {});
  auto mp = train_svm(d.x, relabeled, names(3), {});
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    std::vector<float> q{float(rng.normal() * 3), float(rng.normal() * 3)};
    auto p = predict_probs(m, q);
    auto pp = predict_probs(mp, q);
    for (std::size_t c = 0; c < 3; ++c) CHECK(pp[perm[c]] == Approx(p[c]).epsilon(1e-9));
  }
}

TEST_CASE("model files are deterministic and round-trip") {
  auto d = blobs(3, 20, 16, 6.0, 77);
  TrainParams p;
  p.seed = 5;
  p.threads = 1;
  auto m1 = train_svm(d.x, d.y, names(3), p);
  p.threads = 4;
  auto m2 = train_svm(d.x, d.y, names(3), p);
  const auto bytes = serialize_model(m1);
  CHECK(bytes == serialize_model(m2));

  auto back = deserialize_model(bytes);
  CHECK(serialize_model(back) == bytes);
  for (std::size_t i = 0; i < d.x.rows; ++i) CHECK(predict_probs(back, d.x.row(i)) == predict_probs(m1, d.x.row(i)));

  auto bumped = bytes;
  bumped[5] = char(kModelVersion + 1);
  CHECK_THROWS_AS(deserialize_model(bumped), FormatError);
  CHECK_THROWS_AS(deserialize_model(bytes + "x"), FormatError);
  CHECK_THROWS_AS(deserialize_model(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(deserialize_model("BKSVX"), FormatError);
}

TEST_CASE("grid search prefers a working point and keeps ties in grid order") {
  auto d = blobs(3, 30, 10, 6.0, 8);
  const std::vector<double> cs{1, 10}, scales{1, 2};
  auto g = grid_search(d.x, d.y, names(3), cs, scales, 1);
  REQUIRE(g.points.size() == 4);
  CHECK(g.points[0].c == 1);
  CHECK(g.points[1].gamma == Approx(0.2));
  for (std::size_t i = 0; i < g.best; ++i) CHECK(g.points[i].validation_accuracy < g.points[g.best].validation_accuracy);
  CHECK(g.points[g.best].validation_accuracy > 0.9);
}

TEST_CASE("sigmoid fit and pairwise coupling") {
  std::vector<double> dec;
  std::vector<int> y;
  for (int i = -10; i <= 10; ++i) {
    dec.push_back(i * 0.3);
    y.push_back(i + (i % 3 == 0 ? 3 : 0) > 0 ? 1 : -1);
  }
  auto s = fit_sigmoid(dec, y);
  CHECK(s.a < 0);
  CHECK(sigmoid_probability(3.0, s) > sigmoid_probability(-3.0, s));
  CHECK(sigmoid_probability(1000.0, {-1, 0}) == Approx(1.0));
  CHECK(sigmoid_probability(-1000.0, {-1, 0}) == Approx(0.0));

  // consistent pairwise probabilities recover the generating distribution
  const std::vector<double> truth{0.5, 0.2, 0.2, 0.1};
  std::vector<std::vector<double>> r(4, std::vector<double>(4, 0.0));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) r[i][j] = truth[i] / (truth[i] + truth[j]);
  auto p = couple_pairwise(r);
  for (std::size_t i = 0; i < 4; ++i) CHECK(p[i] == Approx(truth[i]).epsilon(1e-8));
  auto two = couple_pairwise({{0, 0.7}, {0.3, 0}});
  CHECK(two[0] == Approx(0.7).epsilon(1e-9));
}

TEST_CASE("ensemble_average examples and errors") {
  const auto order = race7_label_order();
  auto avg = [&](std::vector<double> a, std::vector<double> b) {
    return ensemble_average({order, std::move(a)}, {order, std::move(b)}).probs;
  };
  std::vector<double> p{0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1};
  CHECK(avg(p, p) == p);
  auto r = avg({1, 0, 0, 0, 0, 0, 0}, {0, 1, 0, 0, 0, 0, 0});
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 0.5);
  r = avg({0.6, 0.4, 0, 0, 0, 0, 0}, {0.2, 0.8, 0, 0, 0, 0, 0});
  CHECK(r[0] == Approx(0.4));
  CHECK(r[1] == Approx(0.6));

  auto other = order;
  std::swap(other[0], other[1]);
  CHECK_THROWS_AS(ensemble_average({order, p}, {other, p}), InvalidEnsembleInput);
  CHECK_THROWS_AS(ensemble_average({order, p}, {order, {1.0}}), InvalidEnsembleInput);
}

TEST_CASE("averaging preserves a shared argmax and is commutative") {
  const auto order = race7_label_order();
  Rng rng(12345);
  int agreeing = 0;
  while (agreeing < 10000) {
    std::vector<double> a(7), b(7);
    double sa = 0, sb = 0;
    for (int i = 0; i < 7; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
      sa += a[i];
      sb += b[i];
    }
    for (int i = 0; i < 7; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const auto ka = argmax7(a).first, kb = argmax7(b).first;
    if (ka != kb) continue;
    ++agreeing;
    auto m = ensemble_average({order, a}, {order, b});
    REQUIRE(argmax7(m.probs).first == ka);
    REQUIRE(m.probs == ensemble_average({order, b}, {order, a}).probs);
    REQUIRE(std::abs(std::accumulate(m.probs.begin(), m.probs.end(), 0.0) - 1.0) < 1e-6);
  }
}

TEST_CASE("merge_to_six is total and onto") {
  CHECK(merge_to_six(Race7::EastAsian) == Race6::Asian);
  CHECK(merge_to_six(Race7::SoutheastAsian) == Race6::Asian);
  CHECK(merge_to_six(Race7::Black) == Race6::Black);
  std::set<Race6> image;
  for (Race7 r : all_labels<Race7>()) image.insert(merge_to_six(r));
  CHECK(image.size() == 6);
}

TEST_CASE("argmax and merge rules used by classify_face") {
  std::vector<double> white{0, 0, 0, 0, 0, 0, 1};
  CHECK(argmax7(white).first == Race7::White);
  CHECK(argmax7(white).second == 1.0);

  std::vector<double> sea{0.05, 0.1, 0.05, 0.05, 0.1, 0.55, 0.1};
  auto [label, conf] = argmax7(sea);
  CHECK(merge_to_six(label) == Race6::Asian);
  CHECK(conf == 0.55);

  std::vector<double> tie{0.4, 0, 0, 0, 0, 0.2, 0.4};
  CHECK(argmax7(tie).first == Race7::Black);

  face::FaceRecord missing;
  missing.face_id = "x";
  CHECK_THROWS_AS(classify_face(missing, SvmEnsemble{}), IncompleteRecord);
}

TEST_CASE("age_bracket argmax with ties to the younger bracket") {
  CHECK(age_bracket(std::vector<double>{0, 0, 1, 0, 0}) == AgeBracket::A20_39);
  CHECK(age_bracket(std::vector<double>{0.5, 0.5, 0, 0, 0}) == AgeBracket::A0_9);
  CHECK(age_bracket(std::vector<double>{0.1, 0.1, 0.2, 0.25, 0.35}) == AgeBracket::A60_plus);
  CHECK_THROWS_AS(age_bracket(std::vector<double>{0.5, 0.5}), InvalidFeature);
  CHECK_THROWS_AS(age_bracket(std::vector<double>{0.5, 0.6, 0, 0, 0}), InvalidFeature);
  CHECK_THROWS_AS(age_bracket(std::vector<double>{1.5, -0.5, 0, 0, 0}), InvalidFeature);
}
