#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qclab/est/collision_trainer.hpp"
#include "qclab/distill/trainer.hpp"
#include "qclab/harness/datagen.hpp"
#include "qclab/ppo/trainer.hpp"
#include "qclab/task/env.hpp"

namespace qclab::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::vector<sim::ObstacleKind> kinds{sim::ObstacleKind::Flat, sim::ObstacleKind::Highland,
                                       sim::ObstacleKind::Barrier, sim::ObstacleKind::Tunnel,
                                       sim::ObstacleKind::Crack};
  int episodes = 200;  // per (kind, l)
  int points = 3;      // values of l across each test range
  double command = 0.8;
  double episode_length_s = 10.0;
  bool randomize = true;
  std::string policy = "student";  // student | teacher | zero | scripted
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int envs = 256;
  std::string out_dir = "runs/default";

  task::EnvConfig env;

  DatagenConfig datagen;
  est::CollisionTrainConfig estimator;

  ppo::TeacherTrainConfig teacher;
  int teacher_iterations = 1000;
  int checkpoint_every = 10;
  // Abort after this many consecutive rolled-back updates.
  int max_skipped_updates = 5;

  distill::DistillConfig distill;
  int distill_iterations = 300;
  int action_error_envs = 64;
  int action_error_steps = 100;

  EvalConfig eval;

  int latent_envs = 64;
  int latent_steps = 100;
  int latent_stride = 5;

  ExperimentConfig();

  // Flat `key = value` text; '#' starts a comment. Unknown keys and
  // malformed values throw ConfigError.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_text() const;

  // Sets one key as if it appeared in the file, then revalidates.
  void set(const std::string& key, const std::string& value);

  // Hash of the keys that fix network shapes; stored in checkpoints.
  std::uint64_t architecture_hash() const;
  std::uint64_t hash() const;
};

// Every key accepted by the config file, in canonical order.
std::vector<std::string> config_keys();

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace qclab::harness
