#include "qclab/ppo/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace qclab::ppo {

GaeResult compute_gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values, const Eigen::MatrixXd& dones,
                      const Eigen::RowVectorXd& bootstrap, double gamma, double lambda) {
  const Eigen::Index T = rewards.rows(), N = rewards.cols();
  if (values.rows() != T || values.cols() != N || dones.rows() != T || dones.cols() != N || bootstrap.size() != N)
    throw std::invalid_argument("compute_gae: shape mismatch");
  GaeResult out;
  out.advantages.resize(T, N);
  Eigen::RowVectorXd next_value = bootstrap;
  Eigen::RowVectorXd next_adv = Eigen::RowVectorXd::Zero(N);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    for (Eigen::Index i = 0; i < N; ++i) {
      const double live = 1.0 - dones(t, i);
      const double delta = rewards(t, i) + gamma * live * next_value[i] - values(t, i);
      next_adv[i] = delta + gamma * lambda * live * next_adv[i];
    }
    out.advantages.row(t) = next_adv;
    next_value = values.row(t);
  }
  out.returns = out.advantages + values;
  return out;
}

void normalize_advantages(Eigen::MatrixXd& a) {
  const double mean = a.mean();
  const double var = (a.array() - mean).square().mean();
  a = (a.array() - mean) / (std::sqrt(var) + 1e-8);
}

}  // namespace qclab::ppo
