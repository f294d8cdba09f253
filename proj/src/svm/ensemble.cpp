#include "biaskit/svm/ensemble.hpp"

#include <cmath>
#include <fmt/core.h>

namespace biaskit::svm {

ProbVector ensemble_average(const ProbVector& a, const ProbVector& b) {
  if (a.labels != b.labels) throw InvalidEnsembleInput("ensemble_average: label orders differ");
  if (a.probs.size() != a.labels.size() || b.probs.size() != b.labels.size())
    throw InvalidEnsembleInput("ensemble_average: probability vector length does not match its labels");
  ProbVector out{a.labels, std::vector<double>(a.probs.size())};
  for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = (a.probs[i] + b.probs[i]) / 2.0;
  return out;
}

Race6 merge_to_six(Race7 label) {
  switch (label) {
    case Race7::EastAsian:
    case Race7::SoutheastAsian: return Race6::Asian;
    case Race7::Black: return Race6::Black;
    case Race7::Indian: return Race6::Indian;
    case Race7::Latinx: return Race6::Latinx;
    case Race7::MiddleEastern: return Race6::MiddleEastern;
    case Race7::White: return Race6::White;
  }
  return Race6::White;
}

MergeMode merge_mode_from_string(std::string_view s) {
  const auto key = fold_label(s);
  if (key == "label") return MergeMode::Label;
  if (key == "probs") return MergeMode::Probs;
  throw ConfigurationError("unknown merge mode '" + std::string(s) + "' (expected label or probs)");
}

std::vector<std::string> race7_label_order() {
  std::vector<std::string> out;
  for (auto name : LabelTraits<Race7>::names) out.emplace_back(name);
  return out;
}

void check_ensemble(const SvmEnsemble& ens) {
  const auto order = race7_label_order();
  if (ens.model_a.label_order != order || ens.model_b.label_order != order)
    throw InvalidEnsembleInput("ensemble models must both use the 7-class race label order");
  if (ens.model_a.feature_dim() != face::kEmbADim)
    throw InvalidEnsembleInput(fmt::format("model A expects {} dims, embedding A has {}", ens.model_a.feature_dim(),
                                           face::kEmbADim));
  if (ens.model_b.feature_dim() != face::kEmbBDim)
    throw InvalidEnsembleInput(fmt::format("model B expects {} dims, embedding B has {}", ens.model_b.feature_dim(),
                                           face::kEmbBDim));
}

std::pair<Race7, double> argmax7(std::span<const double> probs) {
  if (probs.size() != label_count<Race7>()) throw InvalidEnsembleInput("argmax7: expected 7 probabilities");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return {all_labels<Race7>()[best], probs[best]};
}

FaceClassification classify_face(const face::FaceRecord& rec, const SvmEnsemble& ens) {
  if (rec.emb_a.empty() || rec.emb_b.empty())
    throw IncompleteRecord(fmt::format("face {}: missing embedding", rec.face_id));
  const auto order = race7_label_order();
  const ProbVector pa{order, predict_probs(ens.model_a, rec.emb_a)};
  const ProbVector pb{order, predict_probs(ens.model_b, rec.emb_b)};
  const auto avg = ensemble_average(pa, pb);

  FaceClassification out;
  out.probs7 = avg.probs;
  if (ens.merge_mode == MergeMode::Label) {
    const auto [label, p] = argmax7(avg.probs);
    out.race = merge_to_six(label);
    out.confidence = p;
    return out;
  }
  std::array<double, label_count<Race6>()> six{};
  for (Race7 r : all_labels<Race7>()) six[index_of(merge_to_six(r))] += avg.probs[index_of(r)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < six.size(); ++i)
    if (six[i] > six[best]) best = i;
  out.race = all_labels<Race6>()[best];
  out.confidence = six[best];
  return out;
}

AgeBracket age_bracket(std::span<const double> age_probs) {
  if (age_probs.size() != label_count<AgeBracket>())
    throw InvalidFeature(fmt::format("age_bracket: expected 5 probabilities, got {}", age_probs.size()));
  double sum = 0;
  for (double p : age_probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidFeature("age_bracket: invalid probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw InvalidFeature(fmt::format("age_bracket: probabilities sum to {}", sum));
  std::size_t best = 0;
  for (std::size_t i = 1; i < age_probs.size(); ++i)
    if (age_probs[i] > age_probs[best]) best = i;
  return all_labels<AgeBracket>()[best];
}

}  // namespace biaskit::svm
