#pragma once

#include <cstddef>
#include <vector>

#include "qclab/common/rng.hpp"
#include "qclab/sim/obstacles.hpp"

namespace qclab::course {

struct Command {
  double velocity = 0.0;  // m/s along the commanded heading
  double heading = 0.0;   // rad, relative to the lane axis (+x)
};

inline constexpr double kDifficultyStep = 0.1;
inline constexpr double kHeadingJitter = 0.2;

// Promotes when the episode covered more than half of the commanded
// distance, demotes otherwise; the result stays in [0, 1].
double update_difficulty(double difficulty, double episode_distance, double v_cmd, double episode_time);

// v ~ U[0, 1] m/s, heading ~ U[-0.2, 0.2] rad.
Command sample_command(Rng& rng);

struct CurriculumState {
  std::vector<double> difficulty;
  std::vector<sim::ObstacleKind> kind;
  std::vector<Command> command;

  std::size_t size() const { return difficulty.size(); }

  // Applies update_difficulty to one environment at its episode end.
  void end_episode(std::size_t env, double episode_distance, double episode_time);
};

}  // namespace qclab::course
