#include "qclab/ppo/ppo_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qclab::ppo {

namespace {
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

Eigen::RowVectorXd gaussian_log_prob(const Matrix& mean, const Vector& log_std, const Matrix& actions) {
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const Matrix z = (actions - mean).array().colwise() * inv_std;
  const double norm = log_std.sum() + kLogSqrt2Pi * static_cast<double>(log_std.size());
  return (-0.5 * z.array().square().colwise().sum() - norm).matrix();
}

double gaussian_entropy(const Vector& log_std) {
  return (log_std.array() + 0.5 + kLogSqrt2Pi).sum();
}

Matrix gaussian_sample(const Matrix& mean, const Vector& log_std, Rng& rng) {
  Matrix a(mean.rows(), mean.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = mean(r, c) + std::exp(log_std[r]) * rng.normal();
  return a;
}

PpoLossTerms ppo_loss(const Matrix& mean, const Vector& log_std, const Matrix& actions,
                      const Eigen::RowVectorXd& old_log_prob, const Eigen::RowVectorXd& adv,
                      const Eigen::RowVectorXd& values, const Eigen::RowVectorXd& returns, double clip,
                      double value_coef, double entropy_coef) {
  const Eigen::Index B = mean.cols(), D = mean.rows();
  if (actions.rows() != D || actions.cols() != B || log_std.size() != D || old_log_prob.size() != B ||
      adv.size() != B || values.size() != B || returns.size() != B)
    throw std::invalid_argument("ppo_loss: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(B);
  PpoLossTerms t;
  const Eigen::RowVectorXd logp = gaussian_log_prob(mean, log_std, actions);
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
  const Matrix diff = actions - mean;

  // d loss / d logp per sample
  Eigen::RowVectorXd g_logp(B);
  double surr = 0.0, kl = 0.0;
  long clipped = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    const double log_ratio = logp[i] - old_log_prob[i];
    const double rho = std::exp(log_ratio);
    const double rho_c = std::clamp(rho, 1.0 - clip, 1.0 + clip);
    const double unclipped = rho * adv[i], clipped_v = rho_c * adv[i];
    if (unclipped <= clipped_v) {
      surr += unclipped;
      g_logp[i] = -unclipped * inv_b;
    } else {
      surr += clipped_v;
      g_logp[i] = 0.0;
    }
    if (std::abs(rho - 1.0) > clip) ++clipped;
    kl += (rho - 1.0) - log_ratio;
  }
  t.surrogate = -surr / static_cast<double>(B);
  t.approx_kl = kl * inv_b;
  t.clip_fraction = static_cast<double>(clipped) * inv_b;

  // d logp / d mean = (a - mu) / sigma^2, d logp / d log_std = z^2 - 1
  t.grad_mean = (diff.array().colwise() * inv_var).rowwise() * g_logp.array();
  t.grad_log_std = ((diff.array().square().colwise() * inv_var) - 1.0).matrix() * g_logp.transpose();

  const Eigen::RowVectorXd verr = values - returns;
  t.value_loss = verr.squaredNorm() * inv_b;
  t.grad_value = 2.0 * value_coef * inv_b * verr;

  t.entropy = gaussian_entropy(log_std);
  t.grad_log_std.array() -= entropy_coef;

  t.loss = t.surrogate + value_coef * t.value_loss - entropy_coef * t.entropy;
  return t;
}

}  // namespace qclab::ppo
