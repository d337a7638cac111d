#pragma once

#include <vector>

#include "qclab/nn/network.hpp"

namespace qclab::est {

using nn::Matrix;
using nn::Vector;

struct LossGrad {
  double loss = 0.0;
  Matrix grad;  // d loss / d input, same shape as the prediction
};

// Per-link binary cross-entropy from logits, summed over rows and averaged
// over columns. Numerically stable for large |logit|.
LossGrad bce_with_logits(const Matrix& logits, const Matrix& labels);

// BCE of probabilities (clamped away from 0 and 1 by 1e-12).
double bce(double p, double label);

// Mean over columns of the squared L2 norm of (pred - target).
LossGrad squared_error(const Matrix& pred, const Matrix& target);

struct RoaLoss {
  double loss = 0.0;
  Matrix grad_estimate;  // w.r.t. e_hat, target treated as constant
  Matrix grad_latent;    // w.r.t. e, estimate treated as constant
};

// ||e_hat - sg(e)||^2 + lambda ||sg(e_hat) - e||^2, averaged over columns.
RoaLoss roa_loss(const Matrix& estimate, const Matrix& latent, double lambda);

Matrix sigmoid(const Matrix& logits);

// Area under the ROC curve via average ranks; NaN when a class is missing.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

struct BinaryCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double f1() const;
};

BinaryCounts threshold_counts(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

}  // namespace qclab::est
