#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <cstring>
#include <fstream>
#include <limits>
#include <unistd.h>

#include <json.hpp>

#include "biaskit/core/files.hpp"
#include "biaskit/core/rng.hpp"
#include "biaskit/face/embedding_io.hpp"
#include "biaskit/face/face.hpp"

using namespace biaskit;
using namespace biaskit::face;
namespace fs = std::filesystem;
using doctest::Approx;

namespace {

std::vector<FaceDetection> dets(std::initializer_list<double> confs) {
  std::vector<FaceDetection> out;
  int i = 0;
  for (double c : confs) out.push_back({"img" + std::to_string(i++), {0, 0, 10, 10}, c});
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(v.size() - 1));
}

FaceRecord random_record(Rng& rng, int i) {
  FaceRecord r;
  r.face_id = "face" + std::to_string(i);
  r.detection = {"image" + std::to_string(i / 2), {int(rng.below(50)), int(rng.below(50)), 20, 30}, 0.9 + rng.uniform() * 0.1};
  r.image_width_px = 200;
  r.image_height_px = 150;
  r.emb_a.resize(kEmbADim);
  r.emb_b.resize(kEmbBDim);
  for (auto& v : r.emb_a) v = float(rng.normal());
  for (auto& v : r.emb_b) v = float(rng.normal());
  if (i % 2 == 0) r.gender_pred = Gender::Female;
  if (i % 3 == 0) r.age_probs = std::array<double, 5>{0.1, 0.2, 0.3, 0.25, 0.15};
  return r;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("biaskit_test_face_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

void require_same(const FaceRecord& a, const FaceRecord& b) {
  REQUIRE(a.face_id == b.face_id);
  REQUIRE(a.image_id() == b.image_id());
  REQUIRE(a.detection.bbox == b.detection.bbox);
  REQUIRE(a.detection.confidence == b.detection.confidence);
  REQUIRE(a.image_width_px == b.image_width_px);
  REQUIRE(a.gender_pred == b.gender_pred);
  REQUIRE(a.age_probs == b.age_probs);
  REQUIRE(std::memcmp(a.emb_a.data(), b.emb_a.data(), kEmbADim * 4) == 0);
  REQUIRE(std::memcmp(a.emb_b.data(), b.emb_b.data(), kEmbBDim * 4) == 0);
}

}  // namespace

TEST_CASE("filter_detections keeps confidence strictly above the threshold") {
  auto kept = filter_detections(dets({0.95, 0.85}));
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.95);
  CHECK(filter_detections(dets({0.90})).empty());
  CHECK(filter_detections(std::vector<FaceDetection>{}).empty());

  auto many = dets({0.91, 0.2, 0.99, 0.9, 0.95});
  auto once = filter_detections(many);
  CHECK(once.size() == 3);
  CHECK(once[0].image_id == "img0");
  CHECK(once[2].image_id == "img4");
  auto twice = filter_detections(once);
  CHECK(twice.size() == once.size());
}

TEST_CASE("image_area and face_bbox_area") {
  CHECK(image_area(100, 200) == 20000);
  CHECK(image_area(1, 1) == 1);
  CHECK(image_area(640, 480) == 307200);
  CHECK_THROWS_AS(image_area(std::nullopt, 480), AreaUnavailable);
  CHECK_THROWS_AS(image_area(0, 480), AreaUnavailable);

  CHECK(face_bbox_area({"i", {0, 0, 10, 10}, 1.0}) == 100);
  CHECK(face_bbox_area({"i", {5, 5, 3, 4}, 1.0}) == 12);
  CHECK(face_bbox_area({"i", {0, 0, 640, 480}, 1.0}) == image_area(640, 480));
}

TEST_CASE("zscore_by_venue standardizes each venue on its own") {
  auto z = zscore_by_venue({{Venue::NYT, {1, 2, 3}}, {Venue::FOX, {5, 5, 5}}});
  REQUIRE(z[Venue::NYT].defined);
  CHECK(z[Venue::NYT].z == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK_FALSE(z[Venue::FOX].defined);
  CHECK(z[Venue::FOX].z.empty());

  auto single = zscore_by_venue({{Venue::NYT, {7}}});
  CHECK_FALSE(single[Venue::NYT].defined);

  std::vector<std::int64_t> same{4, 9, 100, 3};
  auto both = zscore_by_venue({{Venue::NYT, same}, {Venue::FOX, same}});
  CHECK(both[Venue::NYT].z == both[Venue::FOX].z);

  CHECK_THROWS_AS(zscore_by_venue({{Venue::NYT, {}}}), InvalidInput);
}

TEST_CASE("z-scores have zero mean, unit sd and ignore the unit of area") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> areas(2 + rng.below(300));
    for (auto& a : areas) a = std::int64_t(1 + rng.below(2'000'000));
    auto z = zscore_by_venue({{Venue::NYT, areas}})[Venue::NYT];
    REQUIRE(z.defined);
    CHECK(std::abs(mean(z.z)) < 1e-9);
    CHECK(std::abs(sample_sd(z.z) - 1.0) < 1e-9);

    const std::int64_t k = std::int64_t(1 + rng.below(1000));
    auto scaled = areas;
    for (auto& a : scaled) a *= k;
    auto zs = zscore_by_venue({{Venue::NYT, scaled}})[Venue::NYT];
    for (std::size_t i = 0; i < areas.size(); ++i) CHECK(std::abs(zs.z[i] - z.z[i]) < 1e-9);
  }
}

TEST_CASE("validate rejects malformed records") {
  Rng rng(1);
  auto r = random_record(rng, 0);
  CHECK_NOTHROW(validate(r));
  auto bad = r;
  bad.emb_a.pop_back();
  CHECK_THROWS_AS(validate(bad), InvalidInput);
  bad = r;
  bad.emb_b.push_back(0.f);
  CHECK_THROWS_AS(validate(bad), InvalidInput);
  bad = r;
  bad.detection.confidence = 1.2;
  CHECK_THROWS_AS(validate(bad), InvalidInput);
  bad = r;
  bad.detection.bbox = {190, 0, 20, 30};
  CHECK_THROWS_AS(validate(bad), InvalidInput);
  bad = r;
  bad.age_probs = std::array<double, 5>{0.5, 0.5, 0.5, 0, 0};
  CHECK_THROWS_AS(validate(bad), InvalidInput);
}

TEST_CASE("embedding files round-trip bit-exactly") {
  Rng rng(42);
  std::vector<FaceRecord> recs;
  for (int i = 0; i < 3; ++i) recs.push_back(random_record(rng, i));
  recs[1].emb_a[7] = -0.0f;
  recs[1].emb_b[0] = std::numeric_limits<float>::denorm_min();
  auto paths = embedding_paths(scratch("roundtrip"));
  write_embeddings(paths, recs);
  CHECK(fs::file_size(paths.blob) == 3 * (2048 + 1024) * 4);
  auto back = read_embeddings(paths);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < recs.size(); ++i) require_same(recs[i], back[i]);
  CHECK(std::signbit(back[1].emb_a[7]));

  auto empty = embedding_paths(scratch("empty"));
  write_embeddings(empty, std::vector<FaceRecord>{});
  CHECK(fs::file_size(empty.blob) == 0);
  CHECK(read_embeddings(empty).empty());
}

TEST_CASE("embedding reader rejects trailing bytes, short blobs and bad dims") {
  Rng rng(3);
  std::vector<FaceRecord> recs{random_record(rng, 0), random_record(rng, 1)};
  auto paths = embedding_paths(scratch("broken"));
  write_embeddings(paths, recs);
  const std::string blob = read_file(paths.blob);
  const std::string manifest = read_file(paths.manifest);

  write_file_atomic(paths.blob, blob + std::string(4, '\0'));
  CHECK_THROWS_AS(read_embeddings(paths), FormatError);

  write_file_atomic(paths.blob, blob.substr(0, blob.size() - 4));
  CHECK_THROWS_AS(read_embeddings(paths), FormatError);

  write_file_atomic(paths.blob, blob);
  std::string wrong_dims = manifest;
  wrong_dims.replace(wrong_dims.find("\"emb_a\":2048"), 12, "\"emb_a\":2047");
  write_file_atomic(paths.manifest, wrong_dims);
  CHECK_THROWS_AS(read_embeddings(paths), FormatError);

  std::string wrong_offset = manifest;
  auto second = wrong_offset.find('\n') + 1;
  auto pos = wrong_offset.find("\"emb_a\":12288", second);
  REQUIRE(pos != std::string::npos);
  wrong_offset.replace(pos, 13, "\"emb_a\":12284");
  write_file_atomic(paths.manifest, wrong_offset);
  CHECK_THROWS_AS(read_embeddings(paths), FormatError);

  write_file_atomic(paths.manifest, "{not json\n");
  CHECK_THROWS_AS(read_embeddings(paths), FormatError);
}

TEST_CASE("checked-in stub embedding fixture is readable") {
  auto paths = embedding_paths(fs::path(BIASKIT_FIXTURES) / "embeddings" / "stub");
  auto recs = read_embeddings(paths);
  REQUIRE(recs.size() == 4);
  auto expected = nlohmann::json::parse(read_file(fs::path(BIASKIT_FIXTURES) / "embeddings" / "stub.expected.json"));
  for (const auto& r : recs) {
    CHECK_NOTHROW(validate(r));
    const auto& e = expected.at(r.face_id);
    double sum_a = 0, sum_b = 0;
    for (float v : r.emb_a) sum_a += v;
    for (float v : r.emb_b) sum_b += v;
    CHECK(sum_a == Approx(e.at("sum_a").get<double>()).epsilon(1e-12));
    CHECK(sum_b == Approx(e.at("sum_b").get<double>()).epsilon(1e-12));
    CHECK(double(r.emb_a.front()) == e.at("first_a").get<double>());
    CHECK(double(r.emb_b.back()) == e.at("last_b").get<double>());
  }
  CHECK(recs[1].gender_pred == Gender::Female);
  CHECK_FALSE(recs[2].gender_pred);
  CHECK(recs[3].age_probs->at(3) == 0.5);
}
