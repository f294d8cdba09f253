#pragma once

#include <cstdint>
#include <map>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "biaskit/core/labels.hpp"

namespace biaskit::annotate {

// One side of a victim/perpetrator answer: one of the six races, an
// explicit "Unspecified", or Absent ("No victim" / "No perpetrator").
enum class VpRole : std::uint8_t { Asian, Black, Indian, Latinx, MiddleEastern, White, Unspecified, Absent };

inline constexpr std::size_t kVpRoleCount = 8;

std::optional<Race6> as_race(VpRole role);
VpRole from_race(Race6 race);

struct VictimPerpRecord {
  VpRole victim = VpRole::Absent;
  VpRole perpetrator = VpRole::Absent;

  friend bool operator==(const VictimPerpRecord&, const VictimPerpRecord&) = default;
};

// Answer text as the annotator is asked to produce it.
std::string victim_answer(VpRole role);
std::string perpetrator_answer(VpRole role);

enum class Task { Emotion, Sentiment, Topic, Race, VictimPerp };

std::string_view to_string(Task task);
Task task_from_string(std::string_view s);

struct ProviderMeta {
  std::string provider_id;
  std::string model_version;
  std::string timestamp;  // ISO-8601 UTC
};

struct AnnotationRecord {
  std::string article_id;
  std::optional<Emotion> emotion;
  std::optional<Sentiment> sentiment;
  std::optional<Topic> topic;
  std::optional<Race6> race;
  std::optional<double> race_confidence;
  std::optional<VictimPerpRecord> vp;
  ProviderMeta provider_meta;
  // task name -> reason, for tasks whose provider call failed
  std::map<std::string, std::string> errors;
};

nlohmann::json to_json(const AnnotationRecord& r);
AnnotationRecord annotation_from_json(const nlohmann::json& j);

}  // namespace biaskit::annotate
