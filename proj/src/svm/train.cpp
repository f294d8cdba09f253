#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <map>

#include "biaskit/core/log.hpp"
#include "biaskit/core/rng.hpp"
#include "internal.hpp"

namespace biaskit::svm {

using detail::DistanceSource;
using detail::KernelRows;

void FeatureMatrix::push_row(std::span<const float> x) {
  if (rows == 0 && cols == 0) cols = x.size();
  if (x.size() != cols) throw InvalidFeature(fmt::format("feature row has {} dims, expected {}", x.size(), cols));
  data.insert(data.end(), x.begin(), x.end());
  ++rows;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct TrainedPair {
  BinaryMachine machine;
  std::vector<std::size_t> sv_rows;  // training rows, parallel to machine.coef
};

struct PairFit {
  std::vector<std::size_t> sv_rows;
  std::vector<double> coef;
  double rho = 0;
};

PairFit fit_pair(const DistanceSource& dist, const std::vector<std::size_t>& rows, const std::vector<int>& y,
                 const TrainParams& p) {
  KernelRows k(dist, rows, p.gamma, p.cache_bytes);
  auto sol = detail::solve_csvc(k, y, p.c, p.tolerance);
  if (!sol.converged) log::warn("smo_iteration_limit", {{"rows", rows.size()}, {"iterations", sol.iterations}});
  PairFit f;
  f.rho = sol.rho;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (sol.alpha[i] <= 0) continue;
    f.sv_rows.push_back(rows[i]);
    f.coef.push_back(sol.alpha[i] * double(y[i]));
  }
  return f;
}

double decide(const DistanceSource& dist, const PairFit& f, std::size_t row, double gamma) {
  double s = 0;
  for (std::size_t i = 0; i < f.sv_rows.size(); ++i) s += f.coef[i] * std::exp(-gamma * dist(f.sv_rows[i], row));
  return s - f.rho;
}

// Decision values for every pair row from k-fold fits, with the usual
// fallbacks when a training fold holds a single class.
std::vector<double> cross_decisions(const DistanceSource& dist, const std::vector<std::size_t>& rows,
                                    const std::vector<int>& y, const TrainParams& p, std::uint64_t seed) {
  const std::size_t n = rows.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm.begin(), perm.end());
  const std::size_t folds = std::size_t(std::max(2, p.calibration_folds));
  std::vector<double> dec(n, 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * n / folds, end = (f + 1) * n / folds;
    std::vector<bool> held(n, false);
    for (std::size_t i = begin; i < end; ++i) held[perm[i]] = true;
    std::vector<std::size_t> train_rows;
    std::vector<int> train_y;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (held[i]) continue;
      train_rows.push_back(rows[i]);
      train_y.push_back(y[i]);
      (y[i] > 0 ? pos : neg) += 1;
    }
    if (pos > 0 && neg > 0) {
      const auto fit = fit_pair(dist, train_rows, train_y, p);
      for (std::size_t i = begin; i < end; ++i) dec[perm[i]] = decide(dist, fit, rows[perm[i]], p.gamma);
    } else {
      const double v = pos > 0 ? 1.0 : (neg > 0 ? -1.0 : 0.0);
      for (std::size_t i = begin; i < end; ++i) dec[perm[i]] = v;
    }
  }
  return dec;
}

void check_features(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  for (auto r : rows)
    for (float v : x.row(r))
      if (!std::isfinite(v)) throw InvalidFeature(fmt::format("non-finite feature in training row {}", r));
}

SvmModel train_rows(const FeatureMatrix& x, const DistanceSource& dist, std::span<const std::size_t> rows,
                    std::span<const std::size_t> labels, std::vector<std::string> label_order, TrainParams p) {
  if (p.c <= 0 || !std::isfinite(p.c)) throw ConfigurationError("train_svm: C must be positive");
  if (p.gamma <= 0 || !std::isfinite(p.gamma)) throw ConfigurationError("train_svm: gamma must be positive");

  std::vector<std::vector<std::size_t>> by_class(label_order.size());
  for (auto r : rows) by_class[labels[r]].push_back(r);
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (!by_class[c].empty()) present.push_back(c);
  if (present.size() < 2)
    throw DegenerateTraining(fmt::format("train_svm: {} class(es) present, need at least 2", present.size()));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < present.size(); ++i)
    for (std::size_t j = i + 1; j < present.size(); ++j) pairs.emplace_back(present[i], present[j]);

  std::vector<TrainedPair> trained(pairs.size());
  detail::parallel_for(pairs.size(), p.threads, [&](std::size_t m) {
    const auto [ca, cb] = pairs[m];
    std::vector<std::size_t> pair_rows;
    std::merge(by_class[ca].begin(), by_class[ca].end(), by_class[cb].begin(), by_class[cb].end(),
               std::back_inserter(pair_rows));
    // orientation follows the data, not the label order, so that relabeling
    // the classes leaves every machine unchanged
    const std::size_t first = labels[pair_rows.front()];
    const std::size_t second = first == ca ? cb : ca;
    std::vector<int> y(pair_rows.size());
    std::size_t first_other = pair_rows.size();
    for (std::size_t i = 0; i < pair_rows.size(); ++i) {
      y[i] = labels[pair_rows[i]] == first ? 1 : -1;
      if (y[i] < 0 && first_other == pair_rows.size()) first_other = i;
    }
    const auto fit = fit_pair(dist, pair_rows, y, p);
    auto& out = trained[m];
    out.machine.positive = first;
    out.machine.negative = second;
    out.machine.coef = fit.coef;
    out.machine.rho = fit.rho;
    out.sv_rows = fit.sv_rows;
    if (p.calibrate) {
      const std::uint64_t fold_seed = splitmix(p.seed ^ splitmix(pair_rows.front() * 0x100000001B3ull + pair_rows[first_other]));
      const auto dec = cross_decisions(dist, pair_rows, y, p, fold_seed);
      out.machine.platt = fit_sigmoid(dec, y);
    }
  });

  SvmModel model;
  model.label_order = std::move(label_order);
  model.gamma = p.gamma;
  model.c = p.c;
  model.seed = p.seed;
  model.calibrated = p.calibrate;
  std::map<std::size_t, std::uint32_t> sv_index;
  for (const auto& t : trained)
    for (auto r : t.sv_rows) sv_index.emplace(r, 0);
  model.support_vectors = FeatureMatrix(x.cols);
  for (auto& [row, idx] : sv_index) {
    idx = std::uint32_t(model.support_vectors.rows);
    model.support_vectors.push_row(x.row(row));
    model.sv_train_index.push_back(row);
    model.sv_sqnorm.push_back(detail::sqnorm(x.row(row)));
  }
  for (auto& t : trained) {
    for (auto r : t.sv_rows) t.machine.sv.push_back(sv_index.at(r));
    model.machines.push_back(std::move(t.machine));
  }
  return model;
}

void check_labels(const FeatureMatrix& x, std::span<const std::size_t> labels, const std::vector<std::string>& order) {
  if (x.rows == 0) throw DegenerateTraining("train_svm: no training rows");
  if (labels.size() != x.rows)
    throw InvalidInput(fmt::format("train_svm: {} labels for {} rows", labels.size(), x.rows));
  for (auto l : labels)
    if (l >= order.size()) throw InvalidInput(fmt::format("train_svm: label index {} out of range", l));
}

}  // namespace

SvmModel train_svm(const FeatureMatrix& x, std::span<const std::size_t> labels, std::vector<std::string> label_order,
                   const TrainParams& params) {
  check_labels(x, labels, label_order);
  std::vector<std::size_t> rows(x.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  check_features(x, rows);
  TrainParams p = params;
  if (p.gamma == 0) p.gamma = 1.0 / double(x.cols);
  DistanceSource dist(x, p.threads);
  return train_rows(x, dist, rows, labels, std::move(label_order), p);
}

namespace {

std::vector<double> kernel_column(const SvmModel& model, std::span<const float> x) {
  if (x.size() != model.feature_dim())
    throw InvalidFeature(fmt::format("feature vector has {} dims, model expects {}", x.size(), model.feature_dim()));
  for (float v : x)
    if (!std::isfinite(v)) throw InvalidFeature("non-finite feature value");
  const double xn = detail::sqnorm(x);
  std::vector<double> k(model.support_vectors.rows);
  for (std::size_t s = 0; s < k.size(); ++s) {
    const double d = std::max(0.0, xn + model.sv_sqnorm[s] - 2.0 * detail::dot(x, model.support_vectors.row(s)));
    k[s] = std::exp(-model.gamma * d);
  }
  return k;
}

}  // namespace

std::vector<double> decision_values(const SvmModel& model, std::span<const float> x) {
  const auto k = kernel_column(model, x);
  std::vector<double> out;
  out.reserve(model.machines.size());
  for (const auto& m : model.machines) {
    double s = 0;
    for (std::size_t i = 0; i < m.sv.size(); ++i) s += m.coef[i] * k[m.sv[i]];
    out.push_back(s - m.rho);
  }
  return out;
}

std::vector<double> predict_probs(const SvmModel& model, std::span<const float> x) {
  const auto dec = decision_values(model, x);
  constexpr double kMinProb = 1e-7;
  std::vector<std::size_t> present;
  for (const auto& m : model.machines) {
    present.push_back(m.positive);
    present.push_back(m.negative);
  }
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  std::vector<std::size_t> slot(model.label_order.size(), 0);
  for (std::size_t i = 0; i < present.size(); ++i) slot[present[i]] = i;

  std::vector<std::vector<double>> r(present.size(), std::vector<double>(present.size(), 0.0));
  for (std::size_t m = 0; m < model.machines.size(); ++m) {
    const auto& mc = model.machines[m];
    const double p = std::clamp(sigmoid_probability(dec[m], mc.platt), kMinProb, 1.0 - kMinProb);
    r[slot[mc.positive]][slot[mc.negative]] = p;
    r[slot[mc.negative]][slot[mc.positive]] = 1.0 - p;
  }
  const auto coupled = couple_pairwise(r);
  std::vector<double> out(model.label_order.size(), 0.0);
  for (std::size_t i = 0; i < present.size(); ++i) out[present[i]] = coupled[i];
  return out;
}

std::size_t predict_label(const SvmModel& model, std::span<const float> x) {
  const auto dec = decision_values(model, x);
  std::vector<int> votes(model.label_order.size(), 0);
  for (std::size_t m = 0; m < model.machines.size(); ++m)
    ++votes[dec[m] > 0 ? model.machines[m].positive : model.machines[m].negative];
  return std::size_t(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

GridSearchResult grid_search(const FeatureMatrix& x, std::span<const std::size_t> labels,
                             const std::vector<std::string>& label_order, std::span<const double> cs,
                             std::span<const double> gamma_scales, std::uint64_t seed, double validation_fraction,
                             unsigned threads) {
  check_labels(x, labels, label_order);
  if (cs.empty() || gamma_scales.empty()) throw ConfigurationError("grid_search: empty grid");
  if (!(validation_fraction > 0 && validation_fraction < 1))
    throw ConfigurationError("grid_search: validation fraction must lie in (0, 1)");
  std::vector<std::size_t> all(x.rows);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  check_features(x, all);

  std::vector<std::vector<std::size_t>> by_class(label_order.size());
  for (std::size_t i = 0; i < x.rows; ++i) by_class[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<bool> is_val(x.rows, false);
  for (auto& rows : by_class) {
    if (rows.size() < 2) continue;
    rng.shuffle(rows.begin(), rows.end());
    auto n_val = std::size_t(std::lround(validation_fraction * double(rows.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, rows.size() - 1);
    for (std::size_t i = 0; i < n_val; ++i) is_val[rows[i]] = true;
  }
  std::vector<std::size_t> train, val;
  for (std::size_t i = 0; i < x.rows; ++i) (is_val[i] ? val : train).push_back(i);

  DistanceSource dist(x, threads);
  GridSearchResult result;
  for (double c : cs) {
    for (double scale : gamma_scales) {
      TrainParams p;
      p.c = c;
      p.gamma = scale / double(x.cols);
      p.seed = seed;
      p.calibrate = false;
      p.threads = threads;
      const auto model = train_rows(x, dist, train, labels, label_order, p);
      std::size_t hits = 0;
      for (auto v : val) hits += predict_label(model, x.row(v)) == labels[v];
      GridPoint gp{c, p.gamma, val.empty() ? 0.0 : double(hits) / double(val.size())};
      log::info("grid_point", {{"c", c}, {"gamma", p.gamma}, {"validation_accuracy", gp.validation_accuracy}});
      result.points.push_back(gp);
      if (gp.validation_accuracy > result.points[result.best].validation_accuracy) result.best = result.points.size() - 1;
    }
  }
  return result;
}

}  // namespace biaskit::svm
