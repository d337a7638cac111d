#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "qclab/est/collision_trainer.hpp"
#include "qclab/est/dataset.hpp"
#include "qclab/est/heads.hpp"
#include "qclab/est/history.hpp"
#include "qclab/est/losses.hpp"
#include "qclab/nn/gradcheck.hpp"

using namespace qclab;
using namespace qclab::est;

namespace {

Matrix random_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

nn::GradCheckResult check_net(nn::Network& net, const Matrix& x, Rng& rng) {
  const Matrix probe = random_matrix(net.output_size(), static_cast<int>(x.cols()), rng);
  net.zero_grad();
  nn::ForwardCache cache;
  net.forward(x, &cache);
  net.backward(cache, probe);
  const nn::Vector analytic = net.grads();
  auto loss = [&] { return (net.forward(x).array() * probe.array()).sum(); };
  return nn::check_gradient(loss, net.params(), analytic, 1e-5, 200, &rng);
}

}  // namespace

TEST(History, ZeroPaddedAfterResetAndChronological) {
  ObservationHistory h(10);
  task::Observation o = task::Observation::Zero();
  o[0] = 1.0;
  h.push(o);
  o[0] = 2.0;
  h.push(o);
  std::vector<double> out(10 * kObsDim);
  h.copy_recent(10, out);
  for (int s = 0; s < 8; ++s) EXPECT_EQ(out[s * kObsDim], 0.0);
  EXPECT_EQ(out[8 * kObsDim], 1.0);
  EXPECT_EQ(out[9 * kObsDim], 2.0);
  for (int i = 0; i < 13; ++i) {
    o[0] = 10.0 + i;
    h.push(o);
  }
  h.copy_recent(10, out);
  for (int s = 0; s < 10; ++s) EXPECT_EQ(out[s * kObsDim], 13.0 + s);
  h.reset();
  h.copy_recent(10, out);
  for (double v : out) EXPECT_EQ(v, 0.0);
}

TEST(Bce, HandValues) {
  Matrix logits(1, 1), labels(1, 1);
  logits << 0.0;
  labels << 1.0;
  EXPECT_NEAR(bce_with_logits(logits, labels).loss, std::log(2.0), 1e-15);
  EXPECT_NEAR(bce(0.5, 1.0), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(bce(1.0, 1.0), 0.0, 1e-11);
  EXPECT_NEAR(bce(0.0, 0.0), 0.0, 1e-11);
  // large logits stay finite and exact in the right direction
  logits << 800.0;
  EXPECT_NEAR(bce_with_logits(logits, labels).loss, 0.0, 1e-300);
  labels << 0.0;
  EXPECT_NEAR(bce_with_logits(logits, labels).loss, 800.0, 1e-9);
}

TEST(Bce, SumsLinksAveragesSamples) {
  Matrix logits = Matrix::Zero(17, 4), labels = Matrix::Zero(17, 4);
  EXPECT_NEAR(bce_with_logits(logits, labels).loss, 17.0 * std::log(2.0), 1e-12);
}

TEST(Bce, NonNegativeAndGradientMatchesDifference) {
  Rng rng(3);
  const Matrix logits = 3.0 * random_matrix(17, 8, rng);
  Matrix labels(17, 8);
  for (Eigen::Index i = 0; i < labels.size(); ++i) labels.data()[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
  const auto lg = bce_with_logits(logits, labels);
  EXPECT_GT(lg.loss, 0.0);
  const Matrix expected = (sigmoid(logits) - labels) / 8.0;
  EXPECT_LT((lg.grad - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Auroc, KnownOrderings) {
  EXPECT_DOUBLE_EQ(auroc({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auroc({0.9, 0.8, 0.2, 0.1}, {0, 0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(auroc({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}), 0.5);
  // one inversion out of four pairs
  EXPECT_DOUBLE_EQ(auroc({0.1, 0.6, 0.5, 0.9}, {0, 0, 1, 1}), 0.75);
  EXPECT_TRUE(std::isnan(auroc({0.1, 0.2}, {0, 0})));
}

TEST(Auroc, F1Counts) {
  const auto c = threshold_counts({0.9, 0.7, 0.2, 0.6}, {1, 0, 1, 0});
  EXPECT_EQ(c.tp, 1);
  EXPECT_EQ(c.fp, 2);
  EXPECT_EQ(c.fn, 1);
  EXPECT_EQ(c.tn, 0);
  EXPECT_NEAR(c.f1(), 2.0 / 5.0, 1e-15);
}

TEST(Roa, ZeroWhenEqualAndPlainRegressionAtLambdaZero) {
  Rng rng(5);
  const Matrix e = random_matrix(32, 6, rng);
  const auto same = roa_loss(e, e, 0.2);
  EXPECT_EQ(same.loss, 0.0);
  EXPECT_EQ(same.grad_estimate.norm(), 0.0);

  const Matrix ehat = random_matrix(32, 6, rng);
  const auto plain = roa_loss(ehat, e, 0.0);
  const auto mse = squared_error(ehat, e);
  EXPECT_NEAR(plain.loss, mse.loss, 1e-12);
  EXPECT_LT((plain.grad_estimate - mse.grad).norm(), 1e-12);
  EXPECT_EQ(plain.grad_latent.norm(), 0.0);

  const auto reg = roa_loss(ehat, e, 0.2);
  EXPECT_NEAR(reg.loss, 1.2 * mse.loss, 1e-12);
  EXPECT_LT((reg.grad_latent + 0.2 * mse.grad).norm(), 1e-12);
}

TEST(Heads, Shapes) {
  EXPECT_EQ(make_collision_estimator().input_size(), 450);
  EXPECT_EQ(make_collision_estimator().output_size(), 17);
  EXPECT_EQ(make_collision_estimator(1).input_size(), 45);
  EXPECT_EQ(make_velocity_estimator().output_size(), 3);
  EXPECT_EQ(make_privileged_encoder().input_size(), 17);
  EXPECT_EQ(make_privileged_encoder().output_size(), 32);
  EXPECT_EQ(make_privileged_estimator().input_size(), 6 * 45);
  EXPECT_EQ(make_privileged_estimator().output_size(), 32);
  EXPECT_EQ(make_domain_encoder().input_size(), 576);
  EXPECT_EQ(make_domain_encoder().output_size(), 64);
}

TEST(Heads, ZeroFinalLayerGivesHalfAndBiasIsMonotone) {
  Rng rng(9);
  auto net = make_collision_estimator();
  net.init_orthogonal(rng);
  const std::size_t last = net.layers().size() - 1;
  net.weight(last).setZero();
  net.bias(last).setZero();
  const Matrix x = random_matrix(450, 5, rng);
  const Matrix p = estimate_collision(net, x);
  EXPECT_LT((p.array() - 0.5).abs().maxCoeff(), 1e-15);

  net.init_orthogonal(rng);
  Matrix prev = estimate_collision(net, x);
  for (int k = 0; k < 5; ++k) {
    net.bias(last).array() += 0.3;
    const Matrix cur = estimate_collision(net, x);
    EXPECT_TRUE((cur.array() > prev.array()).all());
    EXPECT_TRUE((cur.array() > 0.0).all() && (cur.array() < 1.0).all());
    prev = cur;
  }
}

TEST(Heads, GradientChecks) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto vel = make_velocity_estimator();
    vel.init_orthogonal(rng);
    EXPECT_LT(check_net(vel, random_matrix(45, 3, rng), rng).relative_error, 1e-4);
    auto enc = make_domain_encoder();
    enc.init_orthogonal(rng);
    Matrix grid(576, 2);
    for (Eigen::Index i = 0; i < grid.size(); ++i) grid.data()[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    EXPECT_LT(check_net(enc, grid, rng).relative_error, 1e-4);
    auto priv = make_privileged_estimator(8);
    priv.init_orthogonal(rng);
    EXPECT_LT(check_net(priv, random_matrix(270, 2, rng), rng).relative_error, 1e-4);
  }
}

TEST(Heads, DomainEncoderDeterministicAndSensitive) {
  Rng rng(13);
  auto enc = make_domain_encoder();
  enc.init_orthogonal(rng);
  const Matrix empty = Matrix::Zero(576, 1);
  EXPECT_EQ(enc.forward(empty), enc.forward(empty));
  Matrix one = empty;
  one(100, 0) = 1.0;
  EXPECT_GT((enc.forward(one) - enc.forward(empty)).norm(), 0.0);
}

TEST(Dataset, RoundTripAndHistorySlice) {
  Rng rng(17);
  CollisionDataset d;
  d.history = 10;
  Matrix h = random_matrix(450, 7, rng).cast<float>().cast<double>();
  Matrix l = Matrix::Zero(17, 7);
  l(3, 2) = 1.0;
  d.append(h, l, {0, 1, 2, 3, 4, 0, 1});
  d.shrink_to_fit();
  const auto path = (std::filesystem::temp_directory_path() / "qclab_ds_test.bin").string();
  d.save(path);
  const auto back = CollisionDataset::load(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.size(), 7u);
  EXPECT_EQ(back.histories, d.histories);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.kinds, d.kinds);
  const auto k1 = d.with_history(1);
  EXPECT_EQ(k1.histories, d.histories.bottomRows(45));
}

TEST(Dataset, RejectsCorruptFile) {
  const auto path = (std::filesystem::temp_directory_path() / "qclab_ds_bad.bin").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("QCDX....", f);
    std::fclose(f);
  }
  EXPECT_ANY_THROW(CollisionDataset::load(path));
  std::filesystem::remove(path);
}

// Labels are a fixed function of the newest observation frame.
TEST(CollisionTrainer, LearnsFunctionOfLastObservation) {
  Rng rng(21);
  CollisionDataset d;
  d.history = 10;
  const int n = 6000;
  Matrix h = random_matrix(450, n, rng);
  Matrix l = Matrix::Zero(17, n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < 17; ++f) l(f, i) = h(405 + f, i) + 0.5 * h(405 + (f + 1) % 45, i) > 1.0 ? 1.0 : 0.0;
  }
  d.append(h, l, std::vector<std::uint8_t>(n, 0));
  CollisionTrainConfig cfg;
  cfg.steps = 2000;
  cfg.batch_size = 128;
  cfg.eval_every = 1000;
  const auto r = train_collision_estimator(d, cfg);
  EXPECT_LT(r.final_metrics.heldout_bce, 0.5 * r.final_metrics.baseline_bce);
  for (int f = 0; f < 17; ++f) EXPECT_GT(r.final_metrics.auroc[f], 0.9);
}
