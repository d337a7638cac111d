#pragma once

#include <array>
#include <string_view>

#include "qclab/common/types.hpp"

namespace qclab::task {

enum class RewardTerm : int {
  GoalVelocity = 0,
  YawRate,
  HipPosition,
  Collision,
  ZVelocity,
  XYAngularVelocity,
  DofAcceleration,
  ActionRate,
  DeltaTorques,
  Torques,
  DofError,
  FeetStumble,
  DofPositionLimits,
};

inline constexpr int kNumRewardTerms = 13;

std::string_view reward_term_name(RewardTerm term);
RewardTerm reward_term_from_name(std::string_view name);

struct RewardWeights {
  std::array<double, kNumRewardTerms> w{1.5, 0.5, -0.5, -10.0, -0.5, -0.01, -2.5e-7, -0.1, -1e-7, -1e-5, -0.04, -1.0, -10.0};

  double& operator[](RewardTerm t) { return w[static_cast<int>(t)]; }
  double operator[](RewardTerm t) const { return w[static_cast<int>(t)]; }
};

struct RewardBreakdown {
  std::array<double, kNumRewardTerms> terms{};
  double total = 0.0;

  double& operator[](RewardTerm t) { return terms[static_cast<int>(t)]; }
  double operator[](RewardTerm t) const { return terms[static_cast<int>(t)]; }
};

struct VelocityRewardParams {
  double k_positive = 1.0;
  double k_negative = -3.0;
  // below this command the tracking term is replaced by exp(-|v|)
  double stand_still_threshold = 0.1;
};

// Heading-constrained forward-velocity tracking. `forward_speed` is the base
// velocity along the body heading, `yaw` the body heading angle.
double reward_velocity(double forward_speed, double yaw, double v_cmd, double heading_cmd,
                       const VelocityRewardParams& params = {});

double reward_yaw_rate(double omega_cmd, double omega_yaw);

// W1 * GuidePos + W2 * NaturalPos. The hip terms use the mean abduction angle
// of each side (left/right) and of each end (front/rear).
double reward_pos(const JointVector& q, const JointVector& q_default, double w1 = 0.5, double w2 = 0.5);

// Number of non-foot links flagged this step.
double reward_collision(const FlagArray& flags);

struct RegularizationInputs {
  Vec3 base_linear_velocity_body = Vec3::Zero();
  Vec3 base_angular_velocity_body = Vec3::Zero();
  JointVector q = JointVector::Zero();
  JointVector q_default = JointVector::Zero();
  JointVector q_min = JointVector::Constant(-1e9);
  JointVector q_max = JointVector::Constant(1e9);
  JointVector qd = JointVector::Zero();
  JointVector previous_qd = JointVector::Zero();
  JointVector action = JointVector::Zero();
  JointVector previous_action = JointVector::Zero();
  JointVector torque = JointVector::Zero();
  JointVector previous_torque = JointVector::Zero();
  std::array<Vec3, kNumLegs> foot_forces{};
  double dt = 0.02;

  RegularizationInputs() {
    for (auto& f : foot_forces) f.setZero();
  }
};

// Fills the nine regularization rows of `out` (unweighted).
void reward_regularization(const RegularizationInputs& in, RewardBreakdown& out);

// Weighted sum of every row; stores and returns the total.
double total_reward(RewardBreakdown& breakdown, const RewardWeights& weights);

}  // namespace qclab::task
