#pragma once

#include "qclab/sim/contact.hpp"
#include "qclab/sim/obstacles.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::sim {

struct SimConfig {
  double dt = 0.005;   // physics substep
  int decimation = 4;  // substeps per 50 Hz control step
  Vec3 gravity{0.0, 0.0, -9.81};
  ContactParams contact;

  double control_dt() const { return dt * decimation; }
};

// One control step: PD joint targets from the action, then `decimation`
// semi-implicit Euler substeps of joint and base dynamics under contact.
// A non-finite result sets `fault` and freezes the state.
RobotState step_dynamics(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                         const RobotState& state, const JointVector& action, const ObstacleSet& obstacles);

// Single physics substep with fixed joint targets; exposed for tests.
RobotState substep(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                   const RobotState& state, const JointVector& joint_targets, const ObstacleSet& obstacles,
                   ContactResult* contacts);

// Kinetic + gravitational + stored spring energy (PD springs toward
// `joint_targets` and contact springs).
double mechanical_energy(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                         const RobotState& state, const JointVector& joint_targets, const ObstacleSet& obstacles);

}  // namespace qclab::sim
