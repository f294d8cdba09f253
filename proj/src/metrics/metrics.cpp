#include "biaskit/metrics/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "biaskit/core/error.hpp"

namespace biaskit::metrics {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t i) const {
  std::int64_t t = 0;
  for (auto c : counts[i]) t += c;
  return t;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::int64_t t = 0;
  for (const auto& row : counts) t += row[j];
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

std::optional<std::size_t> ConfusionMatrix::index_of(const Label& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred,
                          std::vector<Label> label_order) {
  if (y_true.size() != y_pred.size())
    throw InvalidInput("confusion: y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                       std::to_string(y_pred.size()));
  if (label_order.empty()) {
    std::set<Label> seen(y_true.begin(), y_true.end());
    seen.insert(y_pred.begin(), y_pred.end());
    label_order.assign(seen.begin(), seen.end());
  }
  std::map<Label, std::size_t> index;
  for (std::size_t i = 0; i < label_order.size(); ++i) index.emplace(label_order[i], i);
  if (index.size() != label_order.size()) throw InvalidInput("confusion: duplicate label in label order");

  ConfusionMatrix cm;
  cm.labels = std::move(label_order);
  cm.counts.assign(cm.labels.size(), std::vector<std::int64_t>(cm.labels.size(), 0));
  auto lookup = [&](const Label& l) {
    auto it = index.find(l);
    if (it == index.end()) throw InvalidInput("confusion: label '" + l + "' not in label order");
    return it->second;
  };
  for (std::size_t t = 0; t < y_true.size(); ++t) ++cm.counts[lookup(y_true[t])][lookup(y_pred[t])];
  return cm;
}

ClassReport class_report(const ConfusionMatrix& cm) {
  const std::size_t k = cm.size();
  if (k == 0 || cm.counts.size() != k) throw InvalidInput("class_report: empty or malformed confusion matrix");
  for (const auto& row : cm.counts) {
    if (row.size() != k) throw InvalidInput("class_report: confusion matrix is not square");
    for (auto c : row)
      if (c < 0) throw InvalidInput("class_report: negative count");
  }
  const std::int64_t total = cm.total();
  if (total == 0) throw InvalidInput("class_report: confusion matrix has no observations");

  ClassReport r;
  r.labels = cm.labels;
  r.total = total;
  r.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto& m = r.per_class[c];
    const auto tp = cm.counts[c][c];
    const auto col = cm.col_sum(c);
    const auto row = cm.row_sum(c);
    m.support = row;
    m.precision = col > 0 ? double(tp) / double(col) : 0.0;
    m.recall = row > 0 ? double(tp) / double(row) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;

    r.macro_avg.precision += m.precision;
    r.macro_avg.recall += m.recall;
    r.macro_avg.f1 += m.f1;
    const double w = double(row) / double(total);
    r.weighted_avg.precision += w * m.precision;
    r.weighted_avg.recall += w * m.recall;
    r.weighted_avg.f1 += w * m.f1;
  }
  r.macro_avg.precision /= double(k);
  r.macro_avg.recall /= double(k);
  r.macro_avg.f1 /= double(k);
  r.accuracy = double(cm.trace()) / double(total);
  return r;
}

double cohens_kappa(std::span<const Label> y1, std::span<const Label> y2) {
  if (y1.size() != y2.size()) throw InvalidInput("cohens_kappa: sequences differ in length");
  if (y1.empty()) throw InvalidInput("cohens_kappa: empty sequences");
  const double n = double(y1.size());
  std::map<Label, double> m1, m2;
  double agree = 0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    m1[y1[i]] += 1;
    m2[y2[i]] += 1;
    if (y1[i] == y2[i]) agree += 1;
  }
  double pe = 0;
  for (const auto& [label, c1] : m1) {
    auto it = m2.find(label);
    if (it != m2.end()) pe += (c1 / n) * (it->second / n);
  }
  const double po = agree / n;
  if (pe >= 1.0) return 1.0;  // both raters used one identical label throughout, so po = 1
  return (po - pe) / (1.0 - pe);
}

RaterTable::RaterTable(std::size_t items, std::size_t raters)
    : items_(items), raters_(raters), cells_(items * raters) {}

const std::optional<Label>& RaterTable::at(std::size_t item, std::size_t rater) const {
  if (item >= items_ || rater >= raters_) throw InvalidInput("RaterTable: index out of range");
  return cells_[item * raters_ + rater];
}

void RaterTable::set(std::size_t item, std::size_t rater, std::optional<Label> label) {
  if (item >= items_ || rater >= raters_) throw InvalidInput("RaterTable: index out of range");
  cells_[item * raters_ + rater] = std::move(label);
}

std::vector<Label> RaterTable::item_labels(std::size_t item) const {
  std::vector<Label> out;
  for (std::size_t r = 0; r < raters_; ++r)
    if (const auto& v = at(item, r)) out.push_back(*v);
  return out;
}

double krippendorff_alpha(const RaterTable& table) {
  // coincidence matrix over the values that appear in pairable units
  std::map<Label, std::size_t> index;
  std::vector<std::vector<Label>> units;
  for (std::size_t i = 0; i < table.items(); ++i) {
    auto vals = table.item_labels(i);
    if (vals.size() < 2) continue;
    for (const auto& v : vals) index.emplace(v, 0);
    units.push_back(std::move(vals));
  }
  if (units.empty()) throw Undefined("krippendorff_alpha: no item has two or more ratings");
  std::size_t next = 0;
  for (auto& [label, idx] : index) idx = next++;
  const std::size_t k = index.size();

  std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
  for (const auto& vals : units) {
    std::vector<double> counts(k, 0.0);
    for (const auto& v : vals) counts[index[v]] += 1;
    const double m = double(vals.size());
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < k; ++d) {
        const double pairs = c == d ? counts[c] * (counts[c] - 1) : counts[c] * counts[d];
        o[c][d] += pairs / (m - 1.0);
      }
    }
  }
  std::vector<double> marg(k, 0.0);
  double n = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) marg[c] += o[c][d];
    n += marg[c];
  }
  double disagree_obs = 0, disagree_exp = 0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      if (c == d) continue;
      disagree_obs += o[c][d];
      disagree_exp += marg[c] * marg[d];
    }
  }
  // a single value across all pairable ratings: perfect agreement
  if (disagree_exp == 0) return 1.0;
  return 1.0 - (n - 1.0) * disagree_obs / disagree_exp;
}

std::optional<Label> majority_vote(std::span<const Label> item_labels) {
  if (item_labels.empty()) throw InvalidInput("majority_vote: no labels");
  std::map<Label, int> counts;
  for (const auto& l : item_labels) ++counts[l];
  int best = 0, best_count = 0;
  const Label* winner = nullptr;
  for (const auto& [label, c] : counts) {
    if (c > best) {
      best = c;
      best_count = 1;
      winner = &label;
    } else if (c == best) {
      ++best_count;
    }
  }
  if (best_count > 1) return std::nullopt;
  return *winner;
}

double agreement_accuracy(std::span<const std::optional<Label>> votes, std::span<const Label> preds) {
  if (votes.size() != preds.size()) throw InvalidInput("agreement_accuracy: votes and predictions differ in length");
  std::size_t total = 0, match = 0;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (!votes[i]) continue;
    ++total;
    if (*votes[i] == preds[i]) ++match;
  }
  if (total == 0) throw Undefined("agreement_accuracy: no items with a majority vote");
  return double(match) / double(total);
}

}  // namespace biaskit::metrics
