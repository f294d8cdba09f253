#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biaskit/core/error.hpp"

namespace biaskit::svm {

class DegenerateTraining : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidFeature : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Row-major float32 feature matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  FeatureMatrix() = default;
  explicit FeatureMatrix(std::size_t dim) : cols(dim) {}

  std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  void push_row(std::span<const float> x);
};

struct Sigmoid {
  double a = 0;
  double b = 0;
};

// One-vs-one machine. Decision value > 0 votes for `positive`.
struct BinaryMachine {
  std::size_t positive = 0;  // index into SvmModel::label_order
  std::size_t negative = 0;
  std::vector<std::uint32_t> sv;  // rows of SvmModel::support_vectors
  std::vector<double> coef;       // alpha_i * y_i
  double rho = 0;
  Sigmoid platt;
};

struct SvmModel {
  std::vector<std::string> label_order;
  double gamma = 0;
  double c = 0;
  std::uint64_t seed = 0;
  bool calibrated = false;
  std::vector<BinaryMachine> machines;
  FeatureMatrix support_vectors;
  std::vector<std::uint64_t> sv_train_index;  // training row of each support vector
  std::vector<double> sv_sqnorm;

  std::size_t feature_dim() const { return support_vectors.cols; }
};

struct TrainParams {
  double c = 1.0;
  double gamma = 0.0;  // 0: 1 / feature_dim
  std::uint64_t seed = 0;
  bool calibrate = true;
  int calibration_folds = 3;
  double tolerance = 1e-3;
  unsigned threads = 0;  // 0: hardware concurrency
  std::size_t cache_bytes = std::size_t(64) << 20;  // per machine
};

// labels[i] indexes label_order. Machines are trained for every pair of
// classes that occur in the data; absent classes receive probability 0.
SvmModel train_svm(const FeatureMatrix& x, std::span<const std::size_t> labels,
                   std::vector<std::string> label_order, const TrainParams& params);

// One decision value per machine, in model.machines order.
std::vector<double> decision_values(const SvmModel& model, std::span<const float> x);

// Class probabilities over model.label_order via pairwise coupling of the
// per-machine sigmoid probabilities.
std::vector<double> predict_probs(const SvmModel& model, std::span<const float> x);

// One-vs-one majority vote on decision signs; ties go to the earlier label.
std::size_t predict_label(const SvmModel& model, std::span<const float> x);

struct GridPoint {
  double c = 0;
  double gamma = 0;
  double validation_accuracy = 0;
};

struct GridSearchResult {
  std::vector<GridPoint> points;
  std::size_t best = 0;
};

// Holds out a seeded stratified validation fraction, trains uncalibrated
// machines for each (C, gamma) and scores label accuracy. Ties keep the
// earlier grid point. gamma_scales multiply 1 / feature_dim.
GridSearchResult grid_search(const FeatureMatrix& x, std::span<const std::size_t> labels,
                             const std::vector<std::string>& label_order, std::span<const double> cs,
                             std::span<const double> gamma_scales, std::uint64_t seed,
                             double validation_fraction = 0.2, unsigned threads = 0);

inline constexpr std::uint32_t kModelVersion = 1;

std::string serialize_model(const SvmModel& model);
SvmModel deserialize_model(std::string_view bytes);
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

// Pairwise coupling of r[i][j] = P(i | i or j) into class probabilities.
std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r);

double sigmoid_probability(double decision, const Sigmoid& s);

// Platt scaling with regularized targets, Newton iterations with
// backtracking. y[i] is +1 or -1.
Sigmoid fit_sigmoid(std::span<const double> decisions, std::span<const int> y);

}  // namespace biaskit::svm
