#include "biaskit/face/face.hpp"

#include <cmath>
#include <fmt/core.h>

namespace biaskit::face {

void validate(const FaceRecord& r) {
  if (r.emb_a.size() != kEmbADim)
    throw InvalidInput(fmt::format("face {}: emb_a has {} dims, expected {}", r.face_id, r.emb_a.size(), kEmbADim));
  if (r.emb_b.size() != kEmbBDim)
    throw InvalidInput(fmt::format("face {}: emb_b has {} dims, expected {}", r.face_id, r.emb_b.size(), kEmbBDim));
  const auto& d = r.detection;
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0))
    throw InvalidInput(fmt::format("face {}: confidence {} outside [0,1]", r.face_id, d.confidence));
  const auto& b = d.bbox;
  if (b.w <= 0 || b.h <= 0 || b.x < 0 || b.y < 0)
    throw InvalidInput(fmt::format("face {}: degenerate bbox", r.face_id));
  if (r.image_width_px > 0 && r.image_height_px > 0 &&
      (b.x + b.w > r.image_width_px || b.y + b.h > r.image_height_px))
    throw InvalidInput(fmt::format("face {}: bbox exceeds {}x{} image", r.face_id, r.image_width_px, r.image_height_px));
  if (r.age_probs) {
    double sum = 0;
    for (double p : *r.age_probs) {
      if (!(p >= 0.0)) throw InvalidInput(fmt::format("face {}: negative age probability", r.face_id));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw InvalidInput(fmt::format("face {}: age_probs sum to {}", r.face_id, sum));
  }
}

std::vector<FaceDetection> filter_detections(std::span<const FaceDetection> dets, double min_conf) {
  std::vector<FaceDetection> out;
  for (const auto& d : dets)
    if (d.confidence > min_conf) out.push_back(d);
  return out;
}

std::int64_t image_area(std::optional<std::int64_t> width_px, std::optional<std::int64_t> height_px) {
  if (!width_px || !height_px || *width_px <= 0 || *height_px <= 0)
    throw AreaUnavailable("image dimensions unavailable");
  return *width_px * *height_px;
}

std::int64_t face_bbox_area(const FaceDetection& det) { return det.bbox.w * det.bbox.h; }

std::map<Venue, VenueZScores> zscore_by_venue(const std::map<Venue, std::vector<std::int64_t>>& areas) {
  std::map<Venue, VenueZScores> out;
  for (const auto& [venue, list] : areas) {
    if (list.empty()) throw InvalidInput(fmt::format("zscore_by_venue: no areas for {}", to_string(venue)));
    auto& z = out[venue];
    const double n = double(list.size());
    double sum = 0;
    for (auto a : list) sum += double(a);
    z.mean = sum / n;
    if (list.size() < 2) continue;
    double ss = 0;
    for (auto a : list) ss += (double(a) - z.mean) * (double(a) - z.mean);
    z.sd = std::sqrt(ss / (n - 1.0));
    if (z.sd == 0) continue;
    z.defined = true;
    z.z.reserve(list.size());
    for (auto a : list) z.z.push_back((double(a) - z.mean) / z.sd);
  }
  return out;
}

AreaMode area_mode_from_string(std::string_view s) {
  const auto key = fold_label(s);
  if (key == "image") return AreaMode::Image;
  if (key == "facebbox") return AreaMode::FaceBBox;
  throw ConfigurationError("unknown area mode '" + std::string(s) + "' (expected image or face-bbox)");
}

std::string_view to_string(AreaMode m) { return m == AreaMode::Image ? "image" : "face-bbox"; }

}  // namespace biaskit::face
