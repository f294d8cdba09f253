#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biaskit/face/face.hpp"

namespace biaskit::face {

// Manifest: one JSON object per line
//   {face_id, image_id, bbox:[x,y,w,h], confidence, dims:{emb_a,emb_b},
//    offsets:{emb_a,emb_b}, image_width_px, image_height_px,
//    gender_pred?, age_probs?}
// Blob: per face, emb_a then emb_b as float32 little-endian, packed in
// manifest order starting at byte 0.
struct EmbeddingPaths {
  std::filesystem::path manifest;
  std::filesystem::path blob;
};

EmbeddingPaths embedding_paths(const std::filesystem::path& prefix);

void write_embeddings(const EmbeddingPaths& paths, std::span<const FaceRecord> records);

// Throws FormatError on malformed lines, wrong dims, offsets that do not
// follow the packing, a short blob or trailing bytes.
std::vector<FaceRecord> read_embeddings(const EmbeddingPaths& paths);

std::string encode_manifest_line(const FaceRecord& r, std::uint64_t offset_a, std::uint64_t offset_b);

}  // namespace biaskit::face
