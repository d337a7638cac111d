#include "qclab/course/curriculum.hpp"

#include <algorithm>

namespace qclab::course {

double update_difficulty(double difficulty, double episode_distance, double v_cmd, double episode_time) {
  const double half_integral = 0.5 * v_cmd * episode_time;
  const double next = episode_distance > half_integral ? difficulty + kDifficultyStep : difficulty - kDifficultyStep;
  return std::clamp(next, 0.0, 1.0);
}

Command sample_command(Rng& rng) {
  Command c;
  c.velocity = rng.uniform(0.0, 1.0);
  c.heading = rng.uniform(-kHeadingJitter, kHeadingJitter);
  return c;
}

void CurriculumState::end_episode(std::size_t env, double episode_distance, double episode_time) {
  difficulty.at(env) = update_difficulty(difficulty[env], episode_distance, command.at(env).velocity, episode_time);
}

}  // namespace qclab::course
