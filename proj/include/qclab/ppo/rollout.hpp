#pragma once

#include <vector>

#include "qclab/ppo/teacher.hpp"

namespace qclab::ppo {

// One rollout of `horizon` steps over `envs` environments. Per-sample
// matrices are feature-major with column t * envs + i; per-step scalars are
// horizon x envs.
struct RolloutBuffer {
  int horizon = 0;
  int envs = 0;
  int filled = 0;  // completed steps

  Matrix obs, c_hat, v_hat, privileged, domain;  // teacher inputs
  Matrix history6;                               // privileged-estimator input
  Matrix v_true, c_true;                         // supervised labels
  Matrix actions;
  Eigen::RowVectorXd log_prob;
  Matrix rewards, values, dones, timeouts;

  RolloutBuffer() = default;
  RolloutBuffer(int horizon, int envs);

  std::size_t size() const { return static_cast<std::size_t>(horizon) * static_cast<std::size_t>(envs); }
  bool full() const { return filled == horizon; }
  void clear() { filled = 0; }

  TeacherInputs gather(const std::vector<Eigen::Index>& columns) const;
};

template <typename M>
Matrix gather_columns(const M& m, const std::vector<Eigen::Index>& columns) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(columns[k]);
  return out;
}

}  // namespace qclab::ppo
