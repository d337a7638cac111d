#pragma once

#include "qclab/common/rng.hpp"
#include "qclab/common/types.hpp"
#include "qclab/course/curriculum.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::task {

using Observation = Eigen::Matrix<double, kObsDim, 1>;

// Layout of the proprioceptive observation vector.
namespace obs {
inline constexpr int kAngularVelocity = 0;   // body frame, 3
inline constexpr int kProjectedGravity = 3;  // body frame, 3
inline constexpr int kCommand = 6;           // v_cmd, heading error, reserved 0
inline constexpr int kJointPositions = 9;    // q - q_default, 12
inline constexpr int kJointVelocities = 21;  // 12
inline constexpr int kPreviousAction = 33;   // 12
}  // namespace obs

struct ObservationNoise {
  bool enabled = true;
  double joint_position = 0.01;
  double joint_velocity = 0.05;
  double angular_velocity = 0.05;
  double gravity = 0.02;
};

double wrap_angle(double a);

Observation assemble_observation(const sim::RobotModel& model, const sim::RobotState& state,
                                 const course::Command& command, const JointVector& previous_action,
                                 const ObservationNoise& noise, Rng* rng);

}  // namespace qclab::task
