#include "qclab/sim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "qclab/sim/kinematics.hpp"

namespace qclab::sim {

namespace {

Quat integrate_orientation(const Quat& q, const Vec3& omega_world, double dt) {
  const double angle = omega_world.norm() * dt;
  if (angle == 0.0) return q;
  const Quat dq(Eigen::AngleAxisd(angle, omega_world.normalized()));
  Quat out = dq * q;
  out.normalize();
  return out;
}

}  // namespace

RobotState substep(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                   const RobotState& state, const JointVector& joint_targets, const ObstacleSet& obstacles,
                   ContactResult* contacts_out) {
  const double dt = config.dt;
  const KinematicFrames frames = forward_kinematics(model, state);
  const ContactResult contacts =
      resolve_contacts(model, state, frames, obstacles, config.contact, params.friction);

  RobotState next = state;

  // joints: single-DOF effective inertia under PD + contact reaction
  const JointVector pd = params.motor_strength.cwiseProduct(
      model.kp.cwiseProduct(joint_targets - state.joint_positions) -
      model.kd.cwiseProduct(state.joint_velocities));
  const JointVector tau =
      (pd + contacts.joint_torques).cwiseMax(-model.torque_limit).cwiseMin(model.torque_limit);
  next.joint_torques = tau;
  next.joint_velocities = state.joint_velocities + dt * tau.cwiseQuotient(model.leg_effective_inertia);
  next.joint_positions = state.joint_positions + dt * next.joint_velocities;
  for (int j = 0; j < kNumJoints; ++j) {
    if (next.joint_positions[j] < model.q_min[j]) {
      next.joint_positions[j] = model.q_min[j];
      next.joint_velocities[j] = std::max(0.0, next.joint_velocities[j]);
    } else if (next.joint_positions[j] > model.q_max[j]) {
      next.joint_positions[j] = model.q_max[j];
      next.joint_velocities[j] = std::min(0.0, next.joint_velocities[j]);
    }
  }

  // base: Newton-Euler about the frame origin, CoM offset only adds a gravity moment
  const double mass = model.base_mass + params.mass_offset;
  const Mat3 R = state.rotation();
  const Vec3 weight = mass * config.gravity;
  const Vec3 force = contacts.base_force + weight;
  const Vec3 torque = contacts.base_torque + (R * params.com_offset).cross(weight);
  const Mat3 inertia_world = R * model.base_inertia.asDiagonal() * R.transpose();
  const Vec3& w = state.base_angular_velocity;
  const Vec3 w_dot = inertia_world.ldlt().solve(torque - w.cross(inertia_world * w));

  next.base_linear_velocity = state.base_linear_velocity + dt * force / mass;
  next.base_angular_velocity = w + dt * w_dot;
  // Semi-implicit position update; the constant gravity share is integrated
  // exactly so ballistic arcs carry no first-order error.
  next.base_position = state.base_position + dt * next.base_linear_velocity - 0.5 * dt * dt * config.gravity;
  next.base_orientation = integrate_orientation(state.base_orientation, next.base_angular_velocity, dt);
  next.sim_time = state.sim_time + dt;
  next.deep_penetrations = state.deep_penetrations + contacts.deep_penetrations;

  if (contacts_out != nullptr) *contacts_out = contacts;
  return next;
}

RobotState step_dynamics(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                         const RobotState& state, const JointVector& action, const ObstacleSet& obstacles) {
  if (state.fault) return state;
  const JointVector clipped = action.cwiseMax(-1.0).cwiseMin(1.0);
  const JointVector targets = model.default_joint_angles + model.action_scale * clipped;

  std::array<Vec3, kNumLinks> link_sum{};
  std::array<Vec3, kNumLegs> foot_sum{};
  for (auto& f : link_sum) f.setZero();
  for (auto& f : foot_sum) f.setZero();

  RobotState current = state;
  for (int s = 0; s < config.decimation; ++s) {
    ContactResult contacts;
    current = substep(model, config, params, current, targets, obstacles, &contacts);
    for (int i = 0; i < kNumLinks; ++i) link_sum[i] += contacts.link_forces[i];
    for (int i = 0; i < kNumLegs; ++i) foot_sum[i] += contacts.foot_forces[i];
    if (!current.finite()) {
      RobotState faulted = state;
      faulted.fault = true;
      return faulted;
    }
  }
  const double inv = 1.0 / config.decimation;
  for (auto& f : link_sum) f *= inv;
  for (auto& f : foot_sum) f *= inv;
  current.contact = make_contact_report(link_sum, foot_sum, config.contact);
  return current;
}

double mechanical_energy(const RobotModel& model, const SimConfig& config, const DynamicsParams& params,
                         const RobotState& state, const JointVector& joint_targets, const ObstacleSet& obstacles) {
  const double mass = model.base_mass + params.mass_offset;
  const Mat3 R = state.rotation();
  const Mat3 inertia_world = R * model.base_inertia.asDiagonal() * R.transpose();
  const Vec3& w = state.base_angular_velocity;
  double e = 0.5 * mass * state.base_linear_velocity.squaredNorm() + 0.5 * w.dot(inertia_world * w);
  e -= mass * config.gravity.dot(state.base_position + R * params.com_offset);
  e += 0.5 * (model.leg_effective_inertia.cwiseProduct(state.joint_velocities.cwiseAbs2())).sum();
  e += 0.5 * (params.motor_strength.cwiseProduct(model.kp)
                  .cwiseProduct((joint_targets - state.joint_positions).cwiseAbs2()))
                 .sum();

  const KinematicFrames frames = forward_kinematics(model, state);
  auto spring = [&](const PenetrationQuery& q) {
    if (q.hit) {
      const double d = std::min(q.depth, config.contact.max_depth);
      e += 0.5 * config.contact.stiffness * d * d;
    }
  };
  for (const Box& box : obstacles.boxes) {
    spring(oriented_box_penetration(frames.base, box));
    for (const Capsule& c : frames.leg_links) spring(capsule_box_penetration(c, box));
    for (const Vec3& f : frames.feet) spring(point_box_penetration(f, box));
  }
  return e;
}

}  // namespace qclab::sim
