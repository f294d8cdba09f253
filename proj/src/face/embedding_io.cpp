#include "biaskit/face/embedding_io.hpp"

#include <bit>
#include <cstring>
#include <fmt/core.h>
#include <json.hpp>
#include <sstream>

#include "biaskit/core/files.hpp"

namespace biaskit::face {

using nlohmann::json;

namespace {

void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float get_f32(const std::string& in, std::size_t pos) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= std::uint32_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

constexpr std::uint64_t kRecordBytes = (kEmbADim + kEmbBDim) * 4;

}  // namespace

EmbeddingPaths embedding_paths(const std::filesystem::path& prefix) {
  return {std::filesystem::path(prefix.string() + ".manifest.jsonl"), std::filesystem::path(prefix.string() + ".emb.bin")};
}

std::string encode_manifest_line(const FaceRecord& r, std::uint64_t offset_a, std::uint64_t offset_b) {
  json j;
  j["face_id"] = r.face_id;
  j["image_id"] = r.image_id();
  const auto& b = r.detection.bbox;
  j["bbox"] = {b.x, b.y, b.w, b.h};
  j["confidence"] = r.detection.confidence;
  j["dims"] = {{"emb_a", r.emb_a.size()}, {"emb_b", r.emb_b.size()}};
  j["offsets"] = {{"emb_a", offset_a}, {"emb_b", offset_b}};
  j["image_width_px"] = r.image_width_px;
  j["image_height_px"] = r.image_height_px;
  if (r.gender_pred) j["gender_pred"] = std::string(to_string(*r.gender_pred));
  if (r.age_probs) j["age_probs"] = *r.age_probs;
  return j.dump();
}

void write_embeddings(const EmbeddingPaths& paths, std::span<const FaceRecord> records) {
  std::string manifest, blob;
  blob.reserve(records.size() * kRecordBytes);
  for (const auto& r : records) {
    validate(r);
    const std::uint64_t off_a = blob.size();
    for (float v : r.emb_a) put_f32(blob, v);
    const std::uint64_t off_b = blob.size();
    for (float v : r.emb_b) put_f32(blob, v);
    manifest += encode_manifest_line(r, off_a, off_b);
    manifest += '\n';
  }
  write_file_atomic(paths.blob, blob);
  write_file_atomic(paths.manifest, manifest);
}

std::vector<FaceRecord> read_embeddings(const EmbeddingPaths& paths) {
  const std::string manifest = read_file(paths.manifest);
  const std::string blob = read_file(paths.blob);
  std::vector<FaceRecord> out;
  std::istringstream lines(manifest);
  std::string line;
  std::uint64_t cursor = 0;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fail = [&](const std::string& why) {
      return FormatError(fmt::format("{}:{}: {}", paths.manifest.string(), lineno, why));
    };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(std::string("invalid JSON: ") + e.what());
    }
    FaceRecord r;
    std::uint64_t dim_a = 0, dim_b = 0, off_a = 0, off_b = 0;
    try {
      r.face_id = j.at("face_id").get<std::string>();
      r.detection.image_id = j.at("image_id").get<std::string>();
      const auto& bbox = j.at("bbox");
      if (!bbox.is_array() || bbox.size() != 4) throw fail("bbox must be [x,y,w,h]");
      r.detection.bbox = {bbox[0].get<std::int64_t>(), bbox[1].get<std::int64_t>(), bbox[2].get<std::int64_t>(),
                          bbox[3].get<std::int64_t>()};
      r.detection.confidence = j.at("confidence").get<double>();
      dim_a = j.at("dims").at("emb_a").get<std::uint64_t>();
      dim_b = j.at("dims").at("emb_b").get<std::uint64_t>();
      off_a = j.at("offsets").at("emb_a").get<std::uint64_t>();
      off_b = j.at("offsets").at("emb_b").get<std::uint64_t>();
      r.image_width_px = j.value("image_width_px", std::int64_t{0});
      r.image_height_px = j.value("image_height_px", std::int64_t{0});
      if (auto g = j.find("gender_pred"); g != j.end() && !g->is_null()) {
        auto parsed = parse_label<Gender>(g->get<std::string>());
        if (!parsed) throw fail("unknown gender_pred '" + g->get<std::string>() + "'");
        r.gender_pred = parsed;
      }
      if (auto a = j.find("age_probs"); a != j.end() && !a->is_null()) {
        if (!a->is_array() || a->size() != label_count<AgeBracket>()) throw fail("age_probs must have 5 entries");
        std::array<double, label_count<AgeBracket>()> probs{};
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = (*a)[i].get<double>();
        r.age_probs = probs;
      }
    } catch (const json::exception& e) {
      throw fail(std::string("bad field: ") + e.what());
    }
    if (dim_a != kEmbADim || dim_b != kEmbBDim)
      throw fail(fmt::format("dims {}/{} (expected {}/{})", dim_a, dim_b, kEmbADim, kEmbBDim));
    if (off_a != cursor || off_b != cursor + kEmbADim * 4)
      throw fail(fmt::format("offsets {}/{} do not follow packing at byte {}", off_a, off_b, cursor));
    if (cursor + kRecordBytes > blob.size())
      throw fail(fmt::format("blob ends at byte {} before record end {}", blob.size(), cursor + kRecordBytes));
    r.emb_a.resize(kEmbADim);
    r.emb_b.resize(kEmbBDim);
    for (std::size_t i = 0; i < kEmbADim; ++i) r.emb_a[i] = get_f32(blob, off_a + 4 * i);
    for (std::size_t i = 0; i < kEmbBDim; ++i) r.emb_b[i] = get_f32(blob, off_b + 4 * i);
    cursor += kRecordBytes;
    try {
      validate(r);
    } catch (const InvalidInput& e) {
      throw fail(e.what());
    }
    out.push_back(std::move(r));
  }
  if (cursor != blob.size())
    throw FormatError(fmt::format("{}: {} trailing bytes after last record", paths.blob.string(), blob.size() - cursor));
  return out;
}

}  // namespace biaskit::face
