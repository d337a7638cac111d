#include "qclab/sim/kinematics.hpp"

namespace qclab::sim {

namespace {

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }

}  // namespace

KinematicFrames forward_kinematics(const RobotModel& model, const RobotState& state) {
  KinematicFrames out;
  const Mat3 R = state.rotation();
  const Vec3& P = state.base_position;

  out.base.center = P;
  out.base.rotation = R;
  out.base.half_extents = 0.5 * model.trunk_dims;

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double q_hip = state.joint_positions[joint_index(leg, LinkPart::Hip)];
    const double q_thigh = state.joint_positions[joint_index(leg, LinkPart::Thigh)];
    const double q_calf = state.joint_positions[joint_index(leg, LinkPart::Calf)];
    LegFrames& f = out.legs[leg];

    f.joint_origin[0] = P + R * model.hip_offsets[leg];
    f.joint_axis[0] = R.col(0);
    const Mat3 R0 = R * rot_x(q_hip);
    f.joint_origin[1] = f.joint_origin[0] + R0 * Vec3(0.0, RobotModel::side_sign(leg) * model.hip_length, 0.0);
    f.joint_axis[1] = R0.col(1);
    const Mat3 R1 = R0 * rot_y(q_thigh);
    f.knee = f.joint_origin[1] + R1 * Vec3(0.0, 0.0, -model.thigh_length);
    f.joint_origin[2] = f.knee;
    f.joint_axis[2] = R1.col(1);
    const Mat3 R2 = R1 * rot_y(q_calf);
    f.foot = f.knee + R2 * Vec3(0.0, 0.0, -model.calf_length);

    out.feet[leg] = f.foot;
    out.leg_links[link_index(leg, LinkPart::Hip) - 1] = {f.joint_origin[0], f.joint_origin[1], model.hip_radius};
    out.leg_links[link_index(leg, LinkPart::Thigh) - 1] = {f.joint_origin[1], f.knee, model.thigh_radius};
    out.leg_links[link_index(leg, LinkPart::Calf) - 1] = {
        f.knee, f.knee + model.calf_capsule_fraction * (f.foot - f.knee), model.calf_radius};
  }
  return out;
}

std::array<double, 3> leg_joint_torques(const LegFrames& leg, LinkPart last, const Vec3& p, const Vec3& f) {
  std::array<double, 3> tau{0.0, 0.0, 0.0};
  for (int j = 0; j <= static_cast<int>(last); ++j) {
    tau[j] = leg.joint_axis[j].dot((p - leg.joint_origin[j]).cross(f));
  }
  return tau;
}

Vec3 point_velocity(const RobotState& state, const LegFrames* leg, int leg_index, int last, const Vec3& p) {
  Vec3 v = state.base_linear_velocity + state.base_angular_velocity.cross(p - state.base_position);
  if (leg != nullptr) {
    for (int j = 0; j <= last; ++j) {
      const double qd = state.joint_velocities[leg_index * 3 + j];
      v += qd * leg->joint_axis[j].cross(p - leg->joint_origin[j]);
    }
  }
  return v;
}

}  // namespace qclab::sim
