#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biaskit::metrics {

using Label = std::string;

// rows = true label, cols = predicted label
struct ConfusionMatrix {
  std::vector<Label> labels;
  std::vector<std::vector<std::int64_t>> counts;

  std::size_t size() const { return labels.size(); }
  std::int64_t total() const;
  std::int64_t row_sum(std::size_t i) const;
  std::int64_t col_sum(std::size_t j) const;
  std::int64_t trace() const;
  std::optional<std::size_t> index_of(const Label& label) const;
};

// When label_order is empty the matrix uses the sorted union of observed
// labels. Labels outside a given label_order are rejected.
ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          std::vector<Label> label_order = {});

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;
};

struct Averages {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct ClassReport {
  std::vector<Label> labels;
  std::vector<ClassMetrics> per_class;
  Averages macro_avg;
  Averages weighted_avg;
  double accuracy = 0;
  std::int64_t total = 0;
};

// Undefined ratios (zero column or row sums, p + r = 0) are reported as 0
// and still take part in the macro average.
ClassReport class_report(const ConfusionMatrix& cm);

double cohens_kappa(std::span<const Label> y1, std::span<const Label> y2);

// items x raters, row-major; nullopt marks a missing rating.
class RaterTable {
 public:
  RaterTable(std::size_t items, std::size_t raters);

  std::size_t items() const { return items_; }
  std::size_t raters() const { return raters_; }

  const std::optional<Label>& at(std::size_t item, std::size_t rater) const;
  void set(std::size_t item, std::size_t rater, std::optional<Label> label);

  std::vector<Label> item_labels(std::size_t item) const;

 private:
  std::size_t items_;
  std::size_t raters_;
  std::vector<std::optional<Label>> cells_;
};

// Krippendorff's alpha with the nominal distance. Items with fewer than two
// ratings do not contribute. Throws Undefined when nothing is pairable.
double krippendorff_alpha(const RaterTable& table);

// nullopt is the NoMajority marker: the top count is shared.
std::optional<Label> majority_vote(std::span<const Label> item_labels);

// NoMajority entries are dropped from numerator and denominator.
double agreement_accuracy(std::span<const std::optional<Label>> votes, std::span<const Label> preds);

}  // namespace biaskit::metrics
