#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qclab/common/types.hpp"
#include "qclab/est/dataset.hpp"
#include "qclab/nn/adam.hpp"
#include "qclab/nn/network.hpp"

namespace qclab::est {

struct CollisionTrainConfig {
  int steps = 4000;
  int batch_size = 256;
  double lr = 1e-3;
  // lower bound on the share of collision-positive samples per batch
  double positive_fraction = 0.2;
  double holdout_fraction = 0.2;
  int eval_every = 250;
  int channels = 32;
  std::uint64_t seed = 1;
};

struct CollisionMetrics {
  int step = 0;
  double train_bce = 0.0;
  double heldout_bce = 0.0;
  // constant per-link predictor at the training positive rate
  double baseline_bce = 0.0;
  std::array<double, kNumFlags> auroc{};  // NaN for links without both classes
  std::array<double, kNumFlags> f1{};
  std::array<long, kNumFlags> positives{};
};

// Probabilities for histories (history*45 x N).
nn::Matrix estimate_collision(const nn::Network& net, const nn::Matrix& histories);

CollisionMetrics evaluate_collision_estimator(const nn::Network& net, const nn::Matrix& histories,
                                              const nn::Matrix& labels, const Eigen::VectorXd& train_rate);

struct CollisionTrainResult {
  nn::Network net;
  std::vector<CollisionMetrics> history;  // one entry per evaluation
  CollisionMetrics final_metrics;
};

// Mini-batch Adam on summed per-link BCE. Samples with any positive flag are
// oversampled to at least `positive_fraction` of each batch. The held-out
// split is the tail of the dataset.
CollisionTrainResult train_collision_estimator(const CollisionDataset& data, const CollisionTrainConfig& config,
                                               const std::function<void(const CollisionMetrics&)>& on_eval = {});

}  // namespace qclab::est
