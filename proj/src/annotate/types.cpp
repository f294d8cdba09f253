#include "biaskit/annotate/types.hpp"

#include "biaskit/core/error.hpp"

namespace biaskit::annotate {

using nlohmann::json;

std::optional<Race6> as_race(VpRole role) {
  if (role == VpRole::Unspecified || role == VpRole::Absent) return std::nullopt;
  return static_cast<Race6>(static_cast<std::size_t>(role));
}

VpRole from_race(Race6 race) { return static_cast<VpRole>(index_of(race)); }

namespace {

std::string role_answer(VpRole role, const char* absent) {
  if (role == VpRole::Absent) return absent;
  if (role == VpRole::Unspecified) return "Unspecified";
  return std::string(to_string(*as_race(role)));
}

VpRole role_from_answer(const std::string& s, bool victim) {
  const std::string key = fold_label(s);
  if (key == "unspecified") return VpRole::Unspecified;
  if (key == (victim ? "novictim" : "noperpetrator")) return VpRole::Absent;
  if (auto r = parse_label<Race6>(s)) return from_race(*r);
  throw FormatError(std::string("invalid ") + (victim ? "victim" : "perpetrator") + " value '" + s + "'");
}

template <Labeled E>
json opt_label(const std::optional<E>& v) {
  return v ? json(std::string(to_string(*v))) : json(nullptr);
}

template <Labeled E>
std::optional<E> read_label(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FormatError(std::string("annotation field '") + key + "' must be a string");
  auto v = parse_label<E>(it->get<std::string>());
  if (!v) throw FormatError(std::string("annotation field '") + key + "' has out-of-set value '" +
                            it->get<std::string>() + "'");
  return v;
}

}  // namespace

std::string victim_answer(VpRole role) { return role_answer(role, "No victim"); }
std::string perpetrator_answer(VpRole role) { return role_answer(role, "No perpetrator"); }

std::string_view to_string(Task task) {
  switch (task) {
    case Task::Emotion: return "emotion";
    case Task::Sentiment: return "sentiment";
    case Task::Topic: return "topic";
    case Task::Race: return "race";
    case Task::VictimPerp: return "vp";
  }
  return "emotion";
}

Task task_from_string(std::string_view s) {
  const std::string key = fold_label(s);
  if (key == "emotion") return Task::Emotion;
  if (key == "sentiment") return Task::Sentiment;
  if (key == "topic" || key == "category") return Task::Topic;
  if (key == "race") return Task::Race;
  if (key == "vp" || key == "victimperp") return Task::VictimPerp;
  throw InvalidInput("unknown annotation task '" + std::string(s) + "'");
}

json to_json(const AnnotationRecord& r) {
  json j;
  j["article_id"] = r.article_id;
  j["emotion"] = opt_label(r.emotion);
  j["sentiment"] = opt_label(r.sentiment);
  j["topic"] = opt_label(r.topic);
  j["race"] = opt_label(r.race);
  j["race_confidence"] = r.race_confidence ? json(*r.race_confidence) : json(nullptr);
  if (r.vp)
    j["vp"] = {{"victim", victim_answer(r.vp->victim)}, {"perpetrator", perpetrator_answer(r.vp->perpetrator)}};
  else
    j["vp"] = nullptr;
  j["provider_meta"] = {{"provider_id", r.provider_meta.provider_id},
                        {"model_version", r.provider_meta.model_version},
                        {"timestamp", r.provider_meta.timestamp}};
  j["errors"] = r.errors;
  return j;
}

AnnotationRecord annotation_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("annotation record must be a JSON object");
  AnnotationRecord r;
  r.article_id = j.at("article_id").get<std::string>();
  r.emotion = read_label<Emotion>(j, "emotion");
  r.sentiment = read_label<Sentiment>(j, "sentiment");
  r.topic = read_label<Topic>(j, "topic");
  r.race = read_label<Race6>(j, "race");
  if (auto it = j.find("race_confidence"); it != j.end() && !it->is_null()) r.race_confidence = it->get<double>();
  if (auto it = j.find("vp"); it != j.end() && !it->is_null()) {
    r.vp = VictimPerpRecord{role_from_answer(it->at("victim").get<std::string>(), true),
                            role_from_answer(it->at("perpetrator").get<std::string>(), false)};
  }
  auto meta = j.find("provider_meta");
  if (meta == j.end() || !meta->is_object()) throw FormatError("annotation record lacks provider_meta");
  r.provider_meta.provider_id = meta->at("provider_id").get<std::string>();
  r.provider_meta.model_version = meta->value("model_version", "");
  r.provider_meta.timestamp = meta->value("timestamp", "");
  if (auto it = j.find("errors"); it != j.end() && it->is_object())
    r.errors = it->get<std::map<std::string, std::string>>();
  return r;
}

}  // namespace biaskit::annotate
