#include "qclab/harness/policy.hpp"

#include "qclab/est/heads.hpp"
#include "qclab/est/losses.hpp"
#include "qclab/sim/collision_domain.hpp"

namespace qclab::harness {

Matrix ZeroPolicy::act(const task::VecEnv& env) { return Matrix::Zero(kNumJoints, env.size()); }

ScriptedPolicy::ScriptedPolicy() {
  gait.frequency = 2.5;
  gait.thigh = 0.8;
  gait.calf = 1.0;
  gait.calf_phase = -2.2;
}

Matrix ScriptedPolicy::act(const task::VecEnv& env) {
  Matrix a(kNumJoints, env.size());
  for (int i = 0; i < env.size(); ++i) {
    const task::EnvSlot& s = env.slot(i);
    JointVector v = gait.action(s.episode_time);
    // steer back onto the lane axis through hip abduction
    const double corr = heading_gain * (sim::base_yaw(s.state.base_orientation) + 0.5 * s.state.base_position.y());
    for (int leg = 0; leg < kNumLegs; ++leg) v[joint_index(leg, LinkPart::Hip)] += corr;
    a.col(i) = v;
  }
  return a;
}

TeacherPolicy::TeacherPolicy(ppo::TeacherModel model, std::optional<nn::Network> collision, bool use_collision)
    : model_(std::move(model)), collision_(std::move(collision)), use_collision_(use_collision) {}

Matrix TeacherPolicy::act(const task::VecEnv& env) {
  ppo::TeacherInputs in;
  in.obs = env.observations();
  in.c_hat = use_collision_ && collision_
                 ? Matrix(est::sigmoid(collision_->forward(env.histories(est::kCollisionHistory))))
                 : Matrix::Zero(kNumFlags, env.size());
  in.v_hat = model_.velocity_estimator.forward(in.obs);
  in.privileged = env.privileged();
  in.domain = env.collision_domains();
  return model_.act(in);
}

StudentPolicy::StudentPolicy(distill::StudentModel model) : model_(std::move(model)) {}

void StudentPolicy::begin(int num_envs) { hidden_ = Matrix::Zero(distill::kImaginationHidden, num_envs); }

Matrix StudentPolicy::act(const task::VecEnv& env) {
  if (hidden_.cols() != env.size()) begin(env.size());
  const Matrix obs = env.observations();
  const Matrix c_hat = model_.collision_estimate(env.histories(est::kCollisionHistory));
  hidden_ = model_.imagination.step(obs, c_hat, hidden_, nullptr);
  const Matrix v_hat = model_.velocity_estimator.forward(obs);
  const Matrix e_hat = model_.privileged_estimator.forward(env.histories(est::kPrivilegedHistory));
  return model_.actor.forward(ppo::assemble_policy_input(obs, c_hat, v_hat, hidden_, e_hat));
}

void StudentPolicy::after_step(const std::vector<task::StepInfo>& infos) {
  Eigen::RowVectorXd d(static_cast<Eigen::Index>(infos.size()));
  for (std::size_t i = 0; i < infos.size(); ++i) d[static_cast<Eigen::Index>(i)] = infos[i].done ? 1.0 : 0.0;
  distill::reset_hidden(hidden_, d);
}

}  // namespace qclab::harness
