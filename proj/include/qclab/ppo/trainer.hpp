#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qclab/nn/adam.hpp"
#include "qclab/nn/checkpoint.hpp"
#include "qclab/ppo/normalizer.hpp"
#include "qclab/ppo/ppo_loss.hpp"
#include "qclab/ppo/rollout.hpp"
#include "qclab/ppo/teacher.hpp"
#include "qclab/task/env.hpp"

namespace qclab::ppo {

struct TeacherTrainConfig {
  PpoConfig ppo;
  PolicyArch arch;
  int envs = 256;
  double roa_lambda = 0.2;
  // learning rate of the supervised heads (velocity, privileged estimator)
  double estimator_lr = 1e-3;
  // feed the collision estimate; when false c_hat is zero (ablation)
  bool use_collision_estimate = true;
};

inline constexpr int kDifficultyBins = 5;

struct IterationMetrics {
  int iteration = 0;
  double mean_reward = 0.0;  // weighted total per env step, before normalization
  std::array<double, task::kNumRewardTerms> terms{};  // unweighted means per env step
  int episodes = 0;
  double episode_length = 0.0;  // seconds, finished episodes
  double success_rate = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  double velocity_mse = 0.0;
  double roa_loss = 0.0;
  double reward_scale = 1.0;
  std::array<int, kDifficultyBins> difficulty_histogram{};
  bool update_skipped = false;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const IterationMetrics& m);

// Synchronous on-policy teacher training: collect a rollout, then update.
class TeacherTrainer {
 public:
  TeacherTrainer(sim::RobotModel model, task::EnvConfig env, TeacherTrainConfig config, std::uint64_t seed,
                 std::optional<nn::Network> collision_estimator);

  IterationMetrics iterate();
  int iteration() const { return iteration_; }

  const TeacherModel& model() const { return model_; }
  TeacherModel& mutable_model() { return model_; }
  const task::VecEnv& env() const { return env_; }
  task::VecEnv& mutable_env() { return env_; }
  const std::optional<nn::Network>& collision_estimator() const { return collision_estimator_; }
  const TeacherTrainConfig& config() const { return config_; }

  // Collision estimate for histories, or zeros when ablated / absent.
  Matrix collision_estimate(const Matrix& history10) const;

  // Full training state: networks, optimizers, normalizer, environments, streams.
  nn::Checkpoint save_state() const;
  void load_state(const nn::Checkpoint& ckpt);

  // Separate stages for tests.
  void collect(RolloutBuffer& buffer, IterationMetrics& metrics);
  void update(RolloutBuffer& buffer, IterationMetrics& metrics);

 private:
  std::vector<nn::ParamRef> policy_refs();

  TeacherTrainConfig config_;
  task::VecEnv env_;
  TeacherModel model_;
  std::optional<nn::Network> collision_estimator_;
  nn::Adam policy_opt_, velocity_opt_, privileged_opt_;
  RewardNormalizer normalizer_;
  RolloutBuffer buffer_;
  Rng rng_;
  int iteration_ = 0;
};

}  // namespace qclab::ppo
