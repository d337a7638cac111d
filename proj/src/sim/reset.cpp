#include "qclab/sim/reset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qclab/sim/kinematics.hpp"

namespace qclab::sim {

RobotState reset_env(const RobotModel& model, const ObstacleSet& obstacles, Rng& rng, const ResetNoise& noise,
                     const StartPose& start) {
  RobotState s;
  s.base_orientation = Quat(Eigen::AngleAxisd(start.yaw, Vec3::UnitZ()));
  for (int j = 0; j < kNumJoints; ++j) {
    const double q = model.default_joint_angles[j] + rng.uniform(-noise.joint, noise.joint);
    s.joint_positions[j] = std::clamp(q, model.q_min[j], model.q_max[j]);
  }
  for (int i = 0; i < 3; ++i) s.base_linear_velocity[i] = rng.uniform(-noise.base_velocity, noise.base_velocity);

  s.base_position = Vec3(start.x, start.y, 0.0);
  const KinematicFrames frames = forward_kinematics(model, s);
  double lowest = std::numeric_limits<double>::infinity();
  double ground = -std::numeric_limits<double>::infinity();
  for (const Vec3& f : frames.feet) {
    lowest = std::min(lowest, f.z());
    ground = std::max(ground, obstacles.terrain_height(f.x(), f.y(), 0.5));
  }
  if (!std::isfinite(ground)) ground = 0.0;
  s.base_position.z() = ground - lowest;
  return s;
}

RobotState reset_env(const RobotModel& model, const ObstacleSet& obstacles, std::uint64_t seed,
                     const ResetNoise& noise) {
  Rng rng(seed);
  return reset_env(model, obstacles, rng, noise);
}

}  // namespace qclab::sim
