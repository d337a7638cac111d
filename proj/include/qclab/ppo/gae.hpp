#pragma once

#include <Eigen/Dense>

namespace qclab::ppo {

// Time-major T x N arrays (row t = step, column = environment).
struct GaeResult {
  Eigen::MatrixXd advantages;
  Eigen::MatrixXd returns;  // advantages + values, before normalization
};

// delta_t = r_t + gamma (1 - done_t) V_{t+1} - V_t,
// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1},
// with V_T = bootstrap. `dones` holds 0/1.
GaeResult compute_gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values, const Eigen::MatrixXd& dones,
                      const Eigen::RowVectorXd& bootstrap, double gamma, double lambda);

// Zero mean, unit variance over all entries (population std + 1e-8).
void normalize_advantages(Eigen::MatrixXd& advantages);

}  // namespace qclab::ppo
