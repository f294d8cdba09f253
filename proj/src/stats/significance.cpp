#include "biaskit/stats/significance.hpp"

#include <cmath>
#include <numeric>

#include "biaskit/stats/special.hpp"

namespace biaskit::stats {

TestResult chi2_2x2(const Contingency2x2& t) {
  double total = 0;
  std::array<double, 2> rows{0, 0}, cols{0, 0};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (t[i][j] < 0) throw InvalidInput("chi2_2x2: negative count");
      rows[i] += double(t[i][j]);
      cols[j] += double(t[i][j]);
      total += double(t[i][j]);
    }
  }
  if (rows[0] == 0 || rows[1] == 0 || cols[0] == 0 || cols[1] == 0)
    throw TestUndefined("chi2_2x2: zero marginal");
  double stat = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / total;
      const double diff = double(t[i][j]) - expected;
      stat += diff * diff / expected;
    }
  }
  return {stat, chi2_1_sf(stat), 1.0};
}

TestResult chi2_independence(const std::vector<std::vector<std::int64_t>>& table) {
  if (table.empty()) throw TestUndefined("chi2: empty table");
  const std::size_t cols = table[0].size();
  std::vector<double> row_sum(table.size(), 0), col_sum(cols, 0);
  double total = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != cols) throw InvalidInput("chi2: ragged table");
    for (std::size_t j = 0; j < cols; ++j) {
      if (table[i][j] < 0) throw InvalidInput("chi2: negative count");
      row_sum[i] += double(table[i][j]);
      col_sum[j] += double(table[i][j]);
      total += double(table[i][j]);
    }
  }
  std::size_t live_rows = 0, live_cols = 0;
  for (double r : row_sum) live_rows += r > 0;
  for (double c : col_sum) live_cols += c > 0;
  if (live_rows < 2 || live_cols < 2) throw TestUndefined("chi2: fewer than two non-empty rows or columns");
  double stat = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (row_sum[i] == 0) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (col_sum[j] == 0) continue;
      const double expected = row_sum[i] * col_sum[j] / total;
      const double diff = double(table[i][j]) - expected;
      stat += diff * diff / expected;
    }
  }
  const double dof = double((live_rows - 1) * (live_cols - 1));
  return {stat, chi2_sf(stat, dof), dof};
}

namespace {

struct Moments {
  double n, mean, var;
};

Moments moments(std::span<const double> v) {
  const double n = double(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {n, mean, ss / (n - 1.0)};
}

void check_samples(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw TestUndefined("t-test: each sample needs at least two values");
  for (double v : xs)
    if (!std::isfinite(v)) throw InvalidInput("t-test: non-finite value");
  for (double v : ys)
    if (!std::isfinite(v)) throw InvalidInput("t-test: non-finite value");
}

}  // namespace

TestResult welch_t(std::span<const double> xs, std::span<const double> ys) {
  check_samples(xs, ys);
  const auto x = moments(xs), y = moments(ys);
  const double vx = x.var / x.n, vy = y.var / y.n;
  const double se2 = vx + vy;
  if (se2 <= 0) throw TestUndefined("welch_t: both samples have zero variance");
  const double t = (x.mean - y.mean) / std::sqrt(se2);
  const double dof = se2 * se2 / (vx * vx / (x.n - 1.0) + vy * vy / (y.n - 1.0));
  return {t, student_t_two_sided_p(t, dof), dof};
}

TestResult pooled_t(std::span<const double> xs, std::span<const double> ys) {
  check_samples(xs, ys);
  const auto x = moments(xs), y = moments(ys);
  const double dof = x.n + y.n - 2.0;
  const double pooled = ((x.n - 1.0) * x.var + (y.n - 1.0) * y.var) / dof;
  const double se2 = pooled * (1.0 / x.n + 1.0 / y.n);
  if (se2 <= 0) throw TestUndefined("pooled_t: both samples have zero variance");
  const double t = (x.mean - y.mean) / std::sqrt(se2);
  return {t, student_t_two_sided_p(t, dof), dof};
}

Stars star_format(double p) {
  if (p < 1e-4) return Stars::p0001;
  if (p < 1e-3) return Stars::p001;
  if (p < 1e-2) return Stars::p01;
  if (p < 0.05) return Stars::p05;
  return Stars::ns;
}

std::string_view to_string(Stars s) {
  switch (s) {
    case Stars::ns: return "ns";
    case Stars::p05: return "*";
    case Stars::p01: return "**";
    case Stars::p001: return "***";
    case Stars::p0001: return "****";
  }
  return "ns";
}

}  // namespace biaskit::stats
