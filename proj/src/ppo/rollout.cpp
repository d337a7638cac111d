#include "qclab/ppo/rollout.hpp"

#include "qclab/sim/collision_domain.hpp"

namespace qclab::ppo {

RolloutBuffer::RolloutBuffer(int T, int N) : horizon(T), envs(N) {
  const Eigen::Index n = static_cast<Eigen::Index>(T) * N;
  obs.resize(kObsDim, n);
  c_hat.resize(kNumFlags, n);
  v_hat.resize(3, n);
  privileged.resize(kPrivDim, n);
  domain.resize(sim::CollisionDomainGrid::kCells, n);
  history6.resize(est::kPrivilegedHistory * kObsDim, n);
  v_true.resize(3, n);
  c_true.resize(kNumFlags, n);
  actions.resize(kNumJoints, n);
  log_prob.resize(n);
  rewards.resize(T, N);
  values.resize(T, N);
  dones.resize(T, N);
  timeouts.resize(T, N);
}

TeacherInputs RolloutBuffer::gather(const std::vector<Eigen::Index>& columns) const {
  TeacherInputs in;
  in.obs = gather_columns(obs, columns);
  in.c_hat = gather_columns(c_hat, columns);
  in.v_hat = gather_columns(v_hat, columns);
  in.privileged = gather_columns(privileged, columns);
  in.domain = gather_columns(domain, columns);
  return in;
}

}  // namespace qclab::ppo
