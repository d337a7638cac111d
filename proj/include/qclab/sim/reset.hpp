#pragma once

#include <cstdint>

#include "qclab/common/rng.hpp"
#include "qclab/sim/obstacles.hpp"
#include "qclab/sim/robot.hpp"

namespace qclab::sim {

struct ResetNoise {
  double joint = 0.05;          // rad, uniform half-width
  double base_velocity = 0.1;   // m/s, uniform half-width per axis
};

struct StartPose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

// Stand pose at the start position with noise; the lowest foot rests exactly
// on the terrain surface.
RobotState reset_env(const RobotModel& model, const ObstacleSet& obstacles, Rng& rng, const ResetNoise& noise = {},
                     const StartPose& start = {});

RobotState reset_env(const RobotModel& model, const ObstacleSet& obstacles, std::uint64_t seed,
                     const ResetNoise& noise = {});

}  // namespace qclab::sim
