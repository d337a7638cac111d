#include "qclab/est/collision_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qclab/est/heads.hpp"
#include "qclab/est/losses.hpp"

namespace qclab::est {

nn::Matrix estimate_collision(const nn::Network& net, const nn::Matrix& histories) {
  return sigmoid(net.forward(histories));
}

CollisionMetrics evaluate_collision_estimator(const nn::Network& net, const nn::Matrix& histories,
                                              const nn::Matrix& labels, const Eigen::VectorXd& train_rate) {
  CollisionMetrics m;
  const Eigen::Index n = histories.cols();
  constexpr Eigen::Index kChunk = 4096;
  nn::Matrix probs(kNumFlags, n);
  double total = 0.0;
  for (Eigen::Index c = 0; c < n; c += kChunk) {
    const Eigen::Index w = std::min(kChunk, n - c);
    const nn::Matrix logits = net.forward(histories.middleCols(c, w));
    total += bce_with_logits(logits, labels.middleCols(c, w)).loss * static_cast<double>(w);
    probs.middleCols(c, w) = sigmoid(logits);
  }
  m.heldout_bce = total / static_cast<double>(n);
  double base = 0.0;
  for (int f = 0; f < kNumFlags; ++f) {
    const double p = std::clamp(train_rate[f], 1e-6, 1.0 - 1e-6);
    for (Eigen::Index i = 0; i < n; ++i) base += bce(p, labels(f, i));
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    long pos = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      s[i] = probs(f, i);
      y[i] = labels(f, i) != 0.0;
      pos += y[i];
    }
    m.positives[f] = pos;
    m.auroc[f] = auroc(s, y);
    m.f1[f] = threshold_counts(s, y).f1();
  }
  m.baseline_bce = base / static_cast<double>(n);
  return m;
}

CollisionTrainResult train_collision_estimator(const CollisionDataset& data, const CollisionTrainConfig& cfg,
                                               const std::function<void(const CollisionMetrics&)>& on_eval) {
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::Index n_hold = static_cast<Eigen::Index>(std::floor(cfg.holdout_fraction * static_cast<double>(n)));
  const Eigen::Index n_train = n - n_hold;
  if (n_train < cfg.batch_size || n_hold < 1) throw std::invalid_argument("collision dataset too small");

  std::vector<Eigen::Index> positives;
  for (Eigen::Index i = 0; i < n_train; ++i)
    if (data.labels.col(i).any()) positives.push_back(i);
  const Eigen::VectorXd train_rate = data.labels.leftCols(n_train).rowwise().mean();

  Rng rng = Rng::derive(cfg.seed, 0xC011);
  CollisionTrainResult out;
  out.net = make_collision_estimator(data.history, cfg.channels);
  out.net.init_orthogonal(rng);
  nn::Adam adam({{&out.net.params(), &out.net.grads()}}, nn::AdamConfig{cfg.lr});

  const nn::Matrix hold_x = data.histories.middleCols(n_train, n_hold);
  const nn::Matrix hold_y = data.labels.middleCols(n_train, n_hold);

  const int n_pos = positives.empty()
                        ? 0
                        : static_cast<int>(std::ceil(cfg.positive_fraction * static_cast<double>(cfg.batch_size)));
  nn::Matrix bx(data.histories.rows(), cfg.batch_size), by(kNumFlags, cfg.batch_size);
  double running = 0.0;
  for (int step = 1; step <= cfg.steps; ++step) {
    for (int b = 0; b < cfg.batch_size; ++b) {
      const Eigen::Index idx = b < n_pos ? positives[rng.below(positives.size())]
                                         : static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n_train)));
      bx.col(b) = data.histories.col(idx);
      by.col(b) = data.labels.col(idx);
    }
    out.net.zero_grad();
    nn::ForwardCache cache;
    const nn::Matrix logits = out.net.forward(bx, &cache);
    const LossGrad lg = bce_with_logits(logits, by);
    out.net.backward(cache, lg.grad, false);
    adam.step();
    running = step == 1 ? lg.loss : 0.98 * running + 0.02 * lg.loss;

    if (step % cfg.eval_every == 0 || step == cfg.steps) {
      CollisionMetrics m = evaluate_collision_estimator(out.net, hold_x, hold_y, train_rate);
      m.step = step;
      m.train_bce = running;
      out.history.push_back(m);
      if (on_eval) on_eval(m);
    }
  }
  out.final_metrics = out.history.back();
  return out;
}

}  // namespace qclab::est
