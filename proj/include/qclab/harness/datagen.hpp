#pragma once

#include <cstdint>

#include "qclab/est/dataset.hpp"
#include "qclab/task/env.hpp"

namespace qclab::harness {

struct DatagenConfig {
  long transitions = 200000;
  int envs = 256;
  int history = 10;
  // Gaussian action noise on top of the scripted gait.
  double action_noise = 0.3;
  // Control steps skipped after each reset before recording starts.
  int warmup_steps = 10;
};

// Environment settings used for data collection: all obstacle kinds, a random
// difficulty per episode and start poses spread in front of the obstacle.
task::EnvConfig datagen_env_config(task::EnvConfig base);

// Rolls randomized scripted trots and records (history, flags, kind) triples.
est::CollisionDataset generate_collision_dataset(const sim::RobotModel& model, const task::EnvConfig& env,
                                                 const DatagenConfig& config, std::uint64_t seed);

}  // namespace qclab::harness
