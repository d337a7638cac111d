#include "qclab/est/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qclab::est {

LossGrad bce_with_logits(const Matrix& logits, const Matrix& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
    throw std::invalid_argument("bce_with_logits: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(logits.cols());
  LossGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    const double y = labels.data()[i];
    // max(z, 0) - z y + log(1 + exp(-|z|))
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    out.grad.data()[i] = (p - y) * inv_b;
  }
  out.loss = total * inv_b;
  return out;
}

double bce(double p, double label) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return -(label * std::log(q) + (1.0 - label) * std::log(1.0 - q));
}

LossGrad squared_error(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("squared_error: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(pred.cols());
  LossGrad out;
  const Matrix d = pred - target;
  out.loss = d.squaredNorm() * inv_b;
  out.grad = 2.0 * inv_b * d;
  return out;
}

RoaLoss roa_loss(const Matrix& estimate, const Matrix& latent, double lambda) {
  if (estimate.rows() != latent.rows() || estimate.cols() != latent.cols())
    throw std::invalid_argument("roa_loss: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(estimate.cols());
  const Matrix d = estimate - latent;
  RoaLoss out;
  out.loss = (1.0 + lambda) * d.squaredNorm() * inv_b;
  out.grad_estimate = 2.0 * inv_b * d;
  out.grad_latent = -2.0 * lambda * inv_b * d;
  return out;
}

Matrix sigmoid(const Matrix& logits) {
  return logits.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auroc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  long pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] != 0) {
        rank_sum += avg_rank;
        ++pos;
      }
    i = j + 1;
  }
  const long neg = static_cast<long>(n) - pos;
  if (pos == 0 || neg == 0) return std::numeric_limits<double>::quiet_NaN();
  const double u = rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double BinaryCounts::f1() const {
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

BinaryCounts threshold_counts(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
  BinaryCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool p = scores[i] >= threshold;
    const bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace qclab::est
