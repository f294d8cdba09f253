#include <algorithm>
#include <cmath>

#include "biaskit/core/log.hpp"
#include "biaskit/svm/svm.hpp"

namespace biaskit::svm {

namespace {

// log(1 + exp(-|z|)) split so neither branch overflows
double objective(std::span<const double> dec, std::span<const double> target, double a, double b) {
  double f = 0;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const double z = dec[i] * a + b;
    f += z >= 0 ? target[i] * z + std::log1p(std::exp(-z)) : (target[i] - 1.0) * z + std::log1p(std::exp(z));
  }
  return f;
}

}  // namespace

double sigmoid_probability(double decision, const Sigmoid& s) {
  const double z = decision * s.a + s.b;
  return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

Sigmoid fit_sigmoid(std::span<const double> dec, std::span<const int> y) {
  if (dec.size() != y.size()) throw InvalidInput("fit_sigmoid: decision/label length mismatch");
  double prior1 = 0, prior0 = 0;
  for (int v : y) (v > 0 ? prior1 : prior0) += 1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> target(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) target[i] = y[i] > 0 ? hi : lo;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10, kSigma = 1e-12, kEps = 1e-5;
  Sigmoid s{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
  double fval = objective(dec, target, s.a, s.b);

  for (int iter = 0; iter < kMaxIter; ++iter) {
    double h11 = kSigma, h22 = kSigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < dec.size(); ++i) {
      const double z = dec[i] * s.a + s.b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      const double d1 = target[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kEps && std::abs(g2) < kEps) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = s.a + step * da, nb = s.b + step * db;
      const double nf = objective(dec, target, na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        s = {na, nb};
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) {
      log::debug("platt_line_search_failed", {{"iteration", iter}});
      break;
    }
  }
  return s;
}

std::vector<double> couple_pairwise(const std::vector<std::vector<double>>& r) {
  const std::size_t k = r.size();
  if (k == 0) return {};
  if (k == 1) return {1.0};
  std::vector<std::vector<double>> q(k, std::vector<double>(k, 0.0));
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      if (j == t) continue;
      q[t][t] += r[j][t] * r[j][t];
      q[t][j] = -r[j][t] * r[t][j];
    }
  }
  std::vector<double> p(k, 1.0 / double(k)), qp(k, 0.0);
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-12;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double pqp = 0;
    for (std::size_t t = 0; t < k; ++t) {
      qp[t] = 0;
      for (std::size_t j = 0; j < k; ++j) qp[t] += q[t][j] * p[j];
      pqp += p[t] * qp[t];
    }
    double max_error = 0;
    for (std::size_t t = 0; t < k; ++t) max_error = std::max(max_error, std::abs(qp[t] - pqp));
    if (max_error < kEps) break;
    for (std::size_t t = 0; t < k; ++t) {
      const double diff = (-qp[t] + pqp) / q[t][t];
      p[t] += diff;
      pqp = (pqp + diff * (diff * q[t][t] + 2.0 * qp[t])) / (1.0 + diff) / (1.0 + diff);
      for (std::size_t j = 0; j < k; ++j) {
        qp[j] = (qp[j] + diff * q[t][j]) / (1.0 + diff);
        p[j] /= (1.0 + diff);
      }
    }
  }
  double sum = 0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace biaskit::svm
