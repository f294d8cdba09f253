#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biaskit/core/labels.hpp"
#include "biaskit/face/face.hpp"
#include "biaskit/svm/svm.hpp"

namespace biaskit::svm {

class InvalidEnsembleInput : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class IncompleteRecord : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ProbVector {
  std::vector<std::string> labels;
  std::vector<double> probs;
};

ProbVector ensemble_average(const ProbVector& a, const ProbVector& b);

Race6 merge_to_six(Race7 label);

// Label: argmax over the 7 classes, then merge. Probs: sum the two Asian
// classes first, then argmax over 6.
enum class MergeMode { Label, Probs };

MergeMode merge_mode_from_string(std::string_view s);

// Models over the 2048-d and 1024-d spaces; both must use the Race7 label
// order.
struct SvmEnsemble {
  SvmModel model_a;
  SvmModel model_b;
  MergeMode merge_mode = MergeMode::Label;
};

void check_ensemble(const SvmEnsemble& ens);

struct FaceClassification {
  Race6 race = Race6::Asian;
  double confidence = 0;
  std::vector<double> probs7;  // averaged, Race7 order
};

FaceClassification classify_face(const face::FaceRecord& rec, const SvmEnsemble& ens);

// Argmax of the 7 probabilities; ties go to the earlier Race7 label.
std::pair<Race7, double> argmax7(std::span<const double> probs);

// Argmax bracket; ties go to the younger bracket.
AgeBracket age_bracket(std::span<const double> age_probs);

std::vector<std::string> race7_label_order();

}  // namespace biaskit::svm
