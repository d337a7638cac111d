#pragma once

#include <array>

#include "qclab/common/types.hpp"

namespace qclab::sim {

// Kinematic and actuation parameters of the reduced-order quadruped.
// The legs are massless for the base dynamics; each joint carries its own
// effective inertia for the joint-space dynamics.
struct RobotModel {
  // Overall standing envelope (length, width, height).
  Vec3 body_dims{0.71, 0.32, 0.40};
  // Collision box of the trunk, centered on the base frame origin.
  Vec3 trunk_dims{0.50, 0.20, 0.10};

  // Hip abduction joint positions in the base frame, leg order FL, FR, RL, RR.
  std::array<Vec3, kNumLegs> hip_offsets{Vec3{0.1934, 0.0465, 0.0}, Vec3{0.1934, -0.0465, 0.0},
                                          Vec3{-0.1934, 0.0465, 0.0}, Vec3{-0.1934, -0.0465, 0.0}};
  double hip_length = 0.08;  // lateral offset from hip joint to thigh joint
  double thigh_length = 0.213;
  double calf_length = 0.213;

  double hip_radius = 0.03;
  double thigh_radius = 0.025;
  double calf_radius = 0.02;
  // The calf capsule stops short of the foot point so stance never touches it.
  double calf_capsule_fraction = 0.75;

  JointVector default_joint_angles;
  JointVector q_min;
  JointVector q_max;
  JointVector torque_limit;
  JointVector kp;
  JointVector kd;
  JointVector leg_effective_inertia;
  double action_scale = 0.25;

  double base_mass = 15.0;
  Vec3 base_inertia{0.12, 0.35, 0.40};

  // Go2-sized defaults.
  static RobotModel go2();

  // Throws std::invalid_argument on violated invariants.
  void validate() const;

  // Lateral sign of a leg: +1 for left legs, -1 for right legs.
  static double side_sign(int leg) { return is_left(leg) ? 1.0 : -1.0; }
};

// Per-episode physical randomization (mirrors the privileged information).
struct DynamicsParams {
  double mass_offset = 0.0;
  Vec3 com_offset = Vec3::Zero();
  double friction = 0.7;
  JointVector motor_strength = JointVector::Ones();
};

struct ContactReport {
  // Control-step averaged contact force on each link (world frame).
  std::array<Vec3, kNumLinks> link_forces{};
  std::array<double, kNumLinks> link_force_magnitudes{};
  std::array<Vec3, kNumLegs> foot_forces{};
  FlagArray flags{};

  ContactReport() {
    for (auto& f : link_forces) f.setZero();
    for (auto& f : foot_forces) f.setZero();
    link_force_magnitudes.fill(0.0);
    flags.fill(false);
  }
};

// Full simulator truth. Angular velocity is expressed in the world frame.
struct RobotState {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  Vec3 base_linear_velocity = Vec3::Zero();
  Vec3 base_angular_velocity = Vec3::Zero();
  JointVector joint_positions = JointVector::Zero();
  JointVector joint_velocities = JointVector::Zero();
  JointVector joint_torques = JointVector::Zero();
  ContactReport contact;
  double sim_time = 0.0;
  bool fault = false;
  // Count of contacts whose depth exceeded the penetration cap.
  long deep_penetrations = 0;

  Mat3 rotation() const { return base_orientation.toRotationMatrix(); }
  bool finite() const;
};

bool operator==(const RobotState& a, const RobotState& b);

}  // namespace qclab::sim
