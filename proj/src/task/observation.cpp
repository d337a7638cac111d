#include "qclab/task/observation.hpp"

#include <cmath>
#include <numbers>

#include "qclab/sim/collision_domain.hpp"

namespace qclab::task {

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

Observation assemble_observation(const sim::RobotModel& model, const sim::RobotState& state,
                                 const course::Command& command, const JointVector& previous_action,
                                 const ObservationNoise& noise, Rng* rng) {
  Observation o;
  const Mat3 Rt = state.rotation().transpose();
  o.segment<3>(obs::kAngularVelocity) = Rt * state.base_angular_velocity;
  o.segment<3>(obs::kProjectedGravity) = Rt * Vec3(0.0, 0.0, -1.0);
  o[obs::kCommand] = command.velocity;
  o[obs::kCommand + 1] = wrap_angle(command.heading - sim::base_yaw(state.base_orientation));
  o[obs::kCommand + 2] = 0.0;
  o.segment<kNumJoints>(obs::kJointPositions) = state.joint_positions - model.default_joint_angles;
  o.segment<kNumJoints>(obs::kJointVelocities) = state.joint_velocities;
  o.segment<kNumJoints>(obs::kPreviousAction) = previous_action;

  if (noise.enabled && rng != nullptr) {
    auto perturb = [&](int offset, int n, double scale) {
      for (int i = 0; i < n; ++i) o[offset + i] += rng->uniform(-scale, scale);
    };
    perturb(obs::kAngularVelocity, 3, noise.angular_velocity);
    perturb(obs::kProjectedGravity, 3, noise.gravity);
    perturb(obs::kJointPositions, kNumJoints, noise.joint_position);
    perturb(obs::kJointVelocities, kNumJoints, noise.joint_velocity);
  }
  return o;
}

}  // namespace qclab::task
