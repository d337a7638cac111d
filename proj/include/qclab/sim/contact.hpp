#pragma once

#include "qclab/common/types.hpp"
#include "qclab/sim/kinematics.hpp"
#include "qclab/sim/obstacles.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::sim {

// Spring-damper penalty contact with a Coulomb cap on the tangential force.
struct ContactParams {
  double stiffness = 5000.0;          // N/m
  double damping = 50.0;              // N s/m
  double tangential_damping = 100.0;  // N s/m, regularized Coulomb friction
  double max_depth = 0.1;             // m, penetration beyond this is clamped
  double flag_threshold = 5.0;        // N
  double stumble_ratio = 4.0;
};

struct ContactResult {
  std::array<Vec3, kNumLinks> link_forces{};
  std::array<Vec3, kNumLegs> foot_forces{};
  Vec3 base_force = Vec3::Zero();
  Vec3 base_torque = Vec3::Zero();  // about the base frame origin
  JointVector joint_torques = JointVector::Zero();
  int deep_penetrations = 0;

  ContactResult() {
    for (auto& f : link_forces) f.setZero();
    for (auto& f : foot_forces) f.setZero();
  }
};

// Penalty force on a contact point with penetration `depth` along outward
// normal `normal` moving with velocity `velocity`.
Vec3 penalty_force(const ContactParams& params, double friction, double depth, const Vec3& normal,
                   const Vec3& velocity);

struct PenetrationQuery {
  bool hit = false;
  double depth = 0.0;
  Vec3 normal = Vec3::Zero();  // pushes the robot out of the box
  Vec3 point = Vec3::Zero();   // deepest point on the robot primitive
};

PenetrationQuery capsule_box_penetration(const Capsule& capsule, const Box& box);
PenetrationQuery point_box_penetration(const Vec3& p, const Box& box);
PenetrationQuery oriented_box_penetration(const OrientedBox& obb, const Box& box);

ContactResult resolve_contacts(const RobotModel& model, const RobotState& state, const KinematicFrames& frames,
                               const ObstacleSet& obstacles, const ContactParams& params, double friction);

// Builds the per-control-step report (magnitudes and flags) from averaged forces.
ContactReport make_contact_report(const std::array<Vec3, kNumLinks>& link_forces,
                                  const std::array<Vec3, kNumLegs>& foot_forces, const ContactParams& params);

// c_t: links fire above the force threshold; feet fire on the stumble rule.
FlagArray detect_link_collisions(const ContactReport& report, const ContactParams& params = {});

}  // namespace qclab::sim
