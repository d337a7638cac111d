#include "qclab/sim/robot.hpp"

#include <stdexcept>
#include <string>

namespace qclab::sim {

RobotModel RobotModel::go2() {
  RobotModel m;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int hip = joint_index(leg, LinkPart::Hip);
    const int thigh = joint_index(leg, LinkPart::Thigh);
    const int calf = joint_index(leg, LinkPart::Calf);

    m.default_joint_angles[hip] = 0.0;
    m.default_joint_angles[thigh] = 0.8;
    m.default_joint_angles[calf] = -1.5;

    m.q_min[hip] = -1.0472;
    m.q_max[hip] = 1.0472;
    m.q_min[thigh] = -1.5708;
    m.q_max[thigh] = 3.4907;
    m.q_min[calf] = -2.7227;
    m.q_max[calf] = -0.8378;

    m.torque_limit[hip] = 23.7;
    m.torque_limit[thigh] = 23.7;
    m.torque_limit[calf] = 45.43;
  }
  m.kp.setConstant(200.0);
  m.kd.setConstant(6.0);
  m.leg_effective_inertia.setConstant(0.06);
  return m;
}

void RobotModel::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("robot model: non-positive ") + what);
  };
  for (int i = 0; i < 3; ++i) {
    positive(body_dims[i], "body dimension");
    positive(trunk_dims[i], "trunk dimension");
    positive(base_inertia[i], "base inertia");
  }
  positive(hip_length, "hip length");
  positive(thigh_length, "thigh length");
  positive(calf_length, "calf length");
  positive(hip_radius, "hip radius");
  positive(thigh_radius, "thigh radius");
  positive(calf_radius, "calf radius");
  positive(base_mass, "base mass");
  positive(action_scale, "action scale");
  for (int j = 0; j < kNumJoints; ++j) {
    positive(torque_limit[j], "torque limit");
    positive(kp[j], "kp");
    positive(kd[j], "kd");
    positive(leg_effective_inertia[j], "leg inertia");
    if (!(q_min[j] < default_joint_angles[j] && default_joint_angles[j] < q_max[j]))
      throw std::invalid_argument("robot model: default joint angle outside limits");
  }
}

bool RobotState::finite() const {
  return base_position.allFinite() && base_orientation.coeffs().allFinite() &&
         base_linear_velocity.allFinite() && base_angular_velocity.allFinite() &&
         joint_positions.allFinite() && joint_velocities.allFinite() && joint_torques.allFinite();
}

bool operator==(const RobotState& a, const RobotState& b) {
  if (a.base_position != b.base_position || a.base_orientation.coeffs() != b.base_orientation.coeffs() ||
      a.base_linear_velocity != b.base_linear_velocity || a.base_angular_velocity != b.base_angular_velocity ||
      a.joint_positions != b.joint_positions || a.joint_velocities != b.joint_velocities ||
      a.joint_torques != b.joint_torques || a.sim_time != b.sim_time || a.fault != b.fault ||
      a.deep_penetrations != b.deep_penetrations)
    return false;
  for (int i = 0; i < kNumLinks; ++i)
    if (a.contact.link_forces[i] != b.contact.link_forces[i]) return false;
  for (int i = 0; i < kNumLegs; ++i)
    if (a.contact.foot_forces[i] != b.contact.foot_forces[i]) return false;
  return a.contact.flags == b.contact.flags;
}

}  // namespace qclab::sim
