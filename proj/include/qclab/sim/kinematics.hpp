#pragma once

#include <array>

#include "qclab/common/types.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::sim {

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct OrientedBox {
  Vec3 center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
  Vec3 half_extents = Vec3::Zero();
};

// World-frame joint origins and axes of one leg chain (hip, thigh, calf).
struct LegFrames {
  std::array<Vec3, 3> joint_origin{};
  std::array<Vec3, 3> joint_axis{};
  Vec3 knee = Vec3::Zero();
  Vec3 foot = Vec3::Zero();
};

struct KinematicFrames {
  OrientedBox base;
  // Indexed by link_index(leg, part) - 1.
  std::array<Capsule, kNumJoints> leg_links{};
  std::array<Vec3, kNumLegs> feet{};
  std::array<LegFrames, kNumLegs> legs{};

  const Capsule& link(int leg, LinkPart part) const { return leg_links[link_index(leg, part) - 1]; }
};

KinematicFrames forward_kinematics(const RobotModel& model, const RobotState& state);

// Torque on each joint of `leg` produced by force `f` applied at world point
// `p` on the link driven by joint `last` (transpose-Jacobian of the chain).
std::array<double, 3> leg_joint_torques(const LegFrames& leg, LinkPart last, const Vec3& p, const Vec3& f);

// World velocity of point `p` rigidly attached to the link driven by joint
// `last` of `leg`. A null `leg` means a point on the base.
Vec3 point_velocity(const RobotState& state, const LegFrames* leg, int leg_index, int last, const Vec3& p);

}  // namespace qclab::sim
