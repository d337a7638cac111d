#include "qclab/task/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qclab::task {

namespace {
constexpr std::array<std::string_view, kNumRewardTerms> kTermNames = {
    "goal_velocity", "yaw_rate",  "hip_position", "collision",   "z_velocity",  "xy_angular_velocity",
    "dof_acceleration", "action_rate", "delta_torques", "torques", "dof_error", "feet_stumble",
    "dof_position_limits"};
}

std::string_view reward_term_name(RewardTerm term) { return kTermNames.at(static_cast<std::size_t>(term)); }

RewardTerm reward_term_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTermNames.size(); ++i)
    if (kTermNames[i] == name) return static_cast<RewardTerm>(i);
  throw std::invalid_argument("unknown reward term '" + std::string(name) + "'");
}

double reward_velocity(double forward_speed, double yaw, double v_cmd, double heading_cmd,
                       const VelocityRewardParams& params) {
  if (v_cmd < params.stand_still_threshold) return std::exp(-std::abs(forward_speed));
  const double along = forward_speed * std::cos(heading_cmd - yaw);
  const double sign = along > 0.0 ? params.k_positive : params.k_negative;
  return sign * std::abs(std::min(along, v_cmd) / v_cmd);
}

double reward_yaw_rate(double omega_cmd, double omega_yaw) { return std::exp(-4.0 * std::abs(omega_cmd - omega_yaw)); }

double reward_pos(const JointVector& q, const JointVector& q_default, double w1, double w2) {
  auto hip = [&](int leg) { return q[joint_index(leg, LinkPart::Hip)]; };
  const int fl = static_cast<int>(Leg::FL), fr = static_cast<int>(Leg::FR);
  const int rl = static_cast<int>(Leg::RL), rr = static_cast<int>(Leg::RR);
  const double right = 0.5 * (hip(fr) + hip(rr));
  const double left = 0.5 * (hip(fl) + hip(rl));
  const double front = 0.5 * (hip(fl) + hip(fr));
  const double rear = 0.5 * (hip(rl) + hip(rr));
  const double guide = (right + left) * (right + left) + (front - rear) * (front - rear);
  const double natural = (q_default - q).squaredNorm();
  return w1 * guide + w2 * natural;
}

double reward_collision(const FlagArray& flags) {
  int n = 0;
  for (int i = 0; i < kNumLinks; ++i) n += flags[i] ? 1 : 0;
  return n;
}

void reward_regularization(const RegularizationInputs& in, RewardBreakdown& out) {
  out[RewardTerm::ZVelocity] = in.base_linear_velocity_body.z() * in.base_linear_velocity_body.z();
  out[RewardTerm::XYAngularVelocity] = in.base_angular_velocity_body.head<2>().squaredNorm();
  out[RewardTerm::DofAcceleration] = ((in.qd - in.previous_qd) / in.dt).squaredNorm();
  out[RewardTerm::ActionRate] = (in.action - in.previous_action).norm();
  out[RewardTerm::DeltaTorques] = (in.torque - in.previous_torque).squaredNorm();
  out[RewardTerm::Torques] = in.torque.squaredNorm();
  out[RewardTerm::DofError] = (in.q - in.q_default).squaredNorm();
  bool stumble = false;
  for (const Vec3& f : in.foot_forces) stumble = stumble || f.head<2>().norm() > 4.0 * std::abs(f.z());
  out[RewardTerm::FeetStumble] = stumble ? 1.0 : 0.0;
  out[RewardTerm::DofPositionLimits] =
      (in.q_min - in.q).cwiseMax(0.0).sum() + (in.q - in.q_max).cwiseMax(0.0).sum();
}

double total_reward(RewardBreakdown& breakdown, const RewardWeights& weights) {
  double total = 0.0;
  for (int i = 0; i < kNumRewardTerms; ++i) total += weights.w[i] * breakdown.terms[i];
  breakdown.total = total;
  return total;
}

}  // namespace qclab::task
