#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biaskit/core/error.hpp"
#include "biaskit/core/labels.hpp"

namespace biaskit::face {

inline constexpr std::size_t kEmbADim = 2048;
inline constexpr std::size_t kEmbBDim = 1024;
inline constexpr double kMinConfidence = 0.9;

class AreaUnavailable : public Error {
 public:
  using Error::Error;
};

struct BBox {
  std::int64_t x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct FaceDetection {
  std::string image_id;
  BBox bbox;
  double confidence = 0;
};

struct FaceRecord {
  std::string face_id;
  FaceDetection detection;
  std::vector<float> emb_a;
  std::vector<float> emb_b;
  std::int64_t image_width_px = 0;
  std::int64_t image_height_px = 0;
  std::optional<Gender> gender_pred;
  std::optional<std::array<double, label_count<AgeBracket>()>> age_probs;

  const std::string& image_id() const { return detection.image_id; }
};

// Throws InvalidInput on wrong embedding lengths, out-of-range confidence,
// a bbox outside the image, or age_probs that do not sum to 1.
void validate(const FaceRecord& r);

// Keeps detections with confidence strictly above min_conf, in order.
std::vector<FaceDetection> filter_detections(std::span<const FaceDetection> dets,
                                             double min_conf = kMinConfidence);

std::int64_t image_area(std::optional<std::int64_t> width_px, std::optional<std::int64_t> height_px);

std::int64_t face_bbox_area(const FaceDetection& det);

struct VenueZScores {
  std::vector<double> z;  // empty when undefined
  bool defined = false;   // false: single image or zero variance
  double mean = 0;
  double sd = 0;
};

// Per venue independently: z_i = (a_i - mean) / sample sd.
std::map<Venue, VenueZScores> zscore_by_venue(const std::map<Venue, std::vector<std::int64_t>>& areas);

enum class AreaMode { Image, FaceBBox };

AreaMode area_mode_from_string(std::string_view s);
std::string_view to_string(AreaMode m);

}  // namespace biaskit::face
