#include <algorithm>
#include <cmath>
#include <limits>

#include "internal.hpp"

namespace biaskit::svm::detail {

namespace {

constexpr std::size_t kFullMatrixRows = 4096;
constexpr double kTau = 1e-12;

}  // namespace

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

double sqnorm(std::span<const float> a) { return dot(a, a); }

DistanceSource::DistanceSource(const FeatureMatrix& x, unsigned threads) : x_(x), norms_(x.rows) {
  for (std::size_t i = 0; i < x.rows; ++i) norms_[i] = sqnorm(x.row(i));
  if (x.rows > kFullMatrixRows) return;
  const std::size_t n = x.rows;
  full_.assign(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::max(0.0, norms_[i] + norms_[j] - 2.0 * dot(x.row(i), x.row(j)));
      full_[i * n + j] = d;
      full_[j * n + i] = d;
    }
  });
}

double DistanceSource::operator()(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (!full_.empty()) return full_[i * x_.rows + j];
  // same orientation as the full matrix so both paths agree bitwise
  const auto lo = std::min(i, j), hi = std::max(i, j);
  return std::max(0.0, norms_[lo] + norms_[hi] - 2.0 * dot(x_.row(lo), x_.row(hi)));
}

KernelRows::KernelRows(const DistanceSource& dist, std::vector<std::size_t> subset, double gamma,
                       std::size_t budget_bytes)
    : dist_(dist), subset_(std::move(subset)), gamma_(gamma) {
  const std::size_t n = subset_.size();
  capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(1, n * sizeof(double)));
  rows_.resize(n);
  where_.resize(n);
  cached_.assign(n, false);
}

const double* KernelRows::row(std::size_t i) {
  if (cached_[i]) {
    lru_.splice(lru_.begin(), lru_, where_[i]);
    return rows_[i].data();
  }
  if (lru_.size() >= capacity_) {
    const std::size_t victim = lru_.back();
    lru_.pop_back();
    cached_[victim] = false;
    std::vector<double>().swap(rows_[victim]);
  }
  auto& r = rows_[i];
  r.resize(subset_.size());
  const std::size_t gi = subset_[i];
  for (std::size_t j = 0; j < subset_.size(); ++j) r[j] = std::exp(-gamma_ * dist_(gi, subset_[j]));
  lru_.push_front(i);
  where_[i] = lru_.begin();
  cached_[i] = true;
  return r.data();
}

DualSolution solve_csvc(KernelRows& k, std::span<const int> y, double c, double tolerance) {
  const std::size_t n = k.size();
  DualSolution s;
  s.alpha.assign(n, 0.0);
  std::vector<double> g(n, -1.0);
  auto& alpha = s.alpha;
  const std::size_t max_iter = std::max<std::size_t>(10'000'000, n > SIZE_MAX / 100 ? SIZE_MAX : 100 * n);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  for (;;) {
    // i: maximal violating index from I_up
    double gmax = -kInf;
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (alpha[t] < c && -g[t] >= gmax) {
          gmax = -g[t];
          i = std::ptrdiff_t(t);
        }
      } else if (alpha[t] > 0 && g[t] >= gmax) {
        gmax = g[t];
        i = std::ptrdiff_t(t);
      }
    }
    if (i < 0) break;
    const double* ki = k.row(std::size_t(i));

    // j: second-order choice from I_low
    double gmax2 = -kInf, best = kInf;
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y[t] == 1) {
        if (!(alpha[t] > 0)) continue;
        grad_diff = gmax + g[t];
        gmax2 = std::max(gmax2, g[t]);
      } else {
        if (!(alpha[t] < c)) continue;
        grad_diff = gmax - g[t];
        gmax2 = std::max(gmax2, -g[t]);
      }
      if (grad_diff <= 0) continue;
      double quad = 2.0 - 2.0 * ki[t];
      if (quad <= 0) quad = kTau;
      const double obj = -(grad_diff * grad_diff) / quad;
      if (obj <= best) {
        best = obj;
        j = std::ptrdiff_t(t);
      }
    }
    if (gmax + gmax2 < tolerance || j < 0) break;
    if (s.iterations >= max_iter) {
      s.converged = false;
      break;
    }
    ++s.iterations;

    const std::size_t a = std::size_t(i), b = std::size_t(j);
    ki = k.row(a);
    const double* kj = k.row(b);
    const double qij = double(y[a] * y[b]) * ki[b];
    const double old_a = alpha[a], old_b = alpha[b];

    if (y[a] != y[b]) {
      double quad = 2.0 + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-g[a] - g[b]) / quad;
      const double diff = alpha[a] - alpha[b];
      alpha[a] += delta;
      alpha[b] += delta;
      if (diff > 0) {
        if (alpha[b] < 0) {
          alpha[b] = 0;
          alpha[a] = diff;
        }
      } else if (alpha[a] < 0) {
        alpha[a] = 0;
        alpha[b] = -diff;
      }
      if (diff > 0) {
        if (alpha[a] > c) {
          alpha[a] = c;
          alpha[b] = c - diff;
        }
      } else if (alpha[b] > c) {
        alpha[b] = c;
        alpha[a] = c + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (g[a] - g[b]) / quad;
      const double sum = alpha[a] + alpha[b];
      alpha[a] -= delta;
      alpha[b] += delta;
      if (sum > c) {
        if (alpha[a] > c) {
          alpha[a] = c;
          alpha[b] = sum - c;
        }
      } else if (alpha[b] < 0) {
        alpha[b] = 0;
        alpha[a] = sum;
      }
      if (sum > c) {
        if (alpha[b] > c) {
          alpha[b] = c;
          alpha[a] = sum - c;
        }
      } else if (alpha[a] < 0) {
        alpha[a] = 0;
        alpha[b] = sum;
      }
    }

    const double da = alpha[a] - old_a, db = alpha[b] - old_b;
    for (std::size_t t = 0; t < n; ++t)
      g[t] += double(y[t]) * (double(y[a]) * ki[t] * da + double(y[b]) * kj[t] * db);
  }

  double ub = kInf, lb = -kInf, free_sum = 0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = double(y[t]) * g[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  s.rho = free_count > 0 ? free_sum / double(free_count) : (ub + lb) / 2.0;
  return s;
}

}  // namespace biaskit::svm::detail
