#pragma once

#include <cstdint>
#include <list>
#include <span>
#include <vector>

#include "biaskit/core/parallel.hpp"
#include "biaskit/svm/svm.hpp"

namespace biaskit::svm::detail {

double dot(std::span<const float> a, std::span<const float> b);
double sqnorm(std::span<const float> a);

// Squared distances between training rows. Small sets keep the full
// matrix, shared by every machine, fold and grid point.
class DistanceSource {
 public:
  DistanceSource(const FeatureMatrix& x, unsigned threads);

  double operator()(std::size_t i, std::size_t j) const;
  std::size_t size() const { return x_.rows; }

 private:
  const FeatureMatrix& x_;
  std::vector<double> norms_;
  std::vector<double> full_;  // empty when too large
};

// LRU cache of RBF kernel rows for one subset of the training rows.
class KernelRows {
 public:
  KernelRows(const DistanceSource& dist, std::vector<std::size_t> subset, double gamma, std::size_t budget_bytes);

  const double* row(std::size_t i);
  std::size_t size() const { return subset_.size(); }

 private:
  const DistanceSource& dist_;
  std::vector<std::size_t> subset_;
  double gamma_;
  std::size_t capacity_;
  std::vector<std::vector<double>> rows_;
  std::list<std::size_t> lru_;
  std::vector<std::list<std::size_t>::iterator> where_;
  std::vector<bool> cached_;
};

struct DualSolution {
  std::vector<double> alpha;
  double rho = 0;
  std::size_t iterations = 0;
  bool converged = true;
};

// C-SVC dual by SMO with second-order working set selection.
DualSolution solve_csvc(KernelRows& k, std::span<const int> y, double c, double tolerance);

using biaskit::parallel_for;
using biaskit::resolve_threads;

}  // namespace biaskit::svm::detail

