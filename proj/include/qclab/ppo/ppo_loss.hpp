#pragma once

#include <limits>

#include <Eigen/Dense>

#include "qclab/common/rng.hpp"

namespace qclab::ppo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Diagonal Gaussian with state-independent log standard deviation.
// mean and actions: D x B; result: one log-probability per column.
Eigen::RowVectorXd gaussian_log_prob(const Matrix& mean, const Vector& log_std, const Matrix& actions);
double gaussian_entropy(const Vector& log_std);
Matrix gaussian_sample(const Matrix& mean, const Vector& log_std, Rng& rng);

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.01;
  double value_coef = 1.0;
  double clip = 0.2;
  double lr = 2e-4;
  double max_grad_norm = 1.0;
  int horizon = 24;
  bool normalize_rewards = true;
};

struct PpoLossTerms {
  double loss = 0.0;
  double surrogate = 0.0;  // -mean(min(rho A, clip(rho) A))
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  Matrix grad_mean;          // D x B
  Vector grad_log_std;       // D
  Eigen::RowVectorXd grad_value;  // 1 x B
};

// Total loss surrogate + value_coef * mean((V - R)^2) - entropy_coef * H with
// gradients for the policy mean, the log-std and the value predictions.
// `clip` may be +inf to disable clipping.
PpoLossTerms ppo_loss(const Matrix& mean, const Vector& log_std, const Matrix& actions,
                      const Eigen::RowVectorXd& old_log_prob, const Eigen::RowVectorXd& advantages,
                      const Eigen::RowVectorXd& values, const Eigen::RowVectorXd& returns, double clip,
                      double value_coef, double entropy_coef);

}  // namespace qclab::ppo
