#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qclab/common/binary_io.hpp"
#include "qclab/common/rng.hpp"
#include "qclab/course/course.hpp"
#include "qclab/course/curriculum.hpp"
#include "qclab/est/history.hpp"
#include "qclab/sim/collision_domain.hpp"
#include "qclab/sim/dynamics.hpp"
#include "qclab/sim/reset.hpp"
#include "qclab/task/observation.hpp"
#include "qclab/task/privileged.hpp"
#include "qclab/task/reward.hpp"

namespace qclab::task {

enum class Termination : int { None = 0, Fall, BaseContact, Timeout, Fault, Goal };

std::string_view termination_name(Termination t);

struct EnvConfig {
  sim::SimConfig sim;
  sim::ResetNoise reset_noise;
  ObservationNoise obs_noise;
  RandomizationRanges randomization;
  RewardWeights weights;
  VelocityRewardParams velocity;
  course::CourseGeometry geometry;

  // Obstacle kinds and their share of the environments.
  std::vector<std::pair<sim::ObstacleKind, double>> kind_mix{{sim::ObstacleKind::Flat, 1.0}};
  bool curriculum = true;
  double initial_difficulty = 0.0;
  // Draw a fresh difficulty for every episode instead of the curriculum.
  bool random_difficulty = false;
  // Explicit obstacle parameter; overrides the difficulty when set.
  std::optional<double> fixed_l;
  // Fixed forward command with zero heading; sampled per episode when unset.
  std::optional<double> fixed_command;

  double episode_length_s = 10.0;
  double fall_height = 0.12;
  double base_contact_limit_s = 1.0;
  // Limits penalty bounds as a fraction of each joint range around its center.
  double soft_limit_fraction = 0.9;
  double yaw_gain = 0.5;
  double max_yaw_rate = 1.0;
  bool end_at_goal = false;

  // Start pose drawn uniformly between these corners.
  sim::StartPose start_min;
  sim::StartPose start_max;

  int history_length = 10;
};

struct EpisodeSummary {
  sim::ObstacleKind kind = sim::ObstacleKind::Flat;
  double l = 0.0;
  double difficulty = 0.0;
  double command = 0.0;
  double distance = 0.0;  // forward progress along the lane
  double time = 0.0;
  double episode_return = 0.0;
  int steps = 0;
  bool reached_goal = false;
  bool success = false;
  Termination reason = Termination::None;
};

struct StepInfo {
  RewardBreakdown reward;
  bool done = false;
  // Episode ended by the time limit (value bootstrapping applies).
  bool timeout = false;
  Termination reason = Termination::None;
  EpisodeSummary episode;  // valid when done
};

struct EnvSlot {
  sim::RobotState state;
  sim::ObstacleSet obstacles;
  PrivilegedInfo privileged;
  course::Command command;
  est::ObservationHistory history;
  Observation observation = Observation::Zero();
  JointVector previous_action = JointVector::Zero();
  JointVector previous_torque = JointVector::Zero();
  JointVector previous_qd = JointVector::Zero();
  Rng rng;
  double episode_time = 0.0;
  double base_contact_time = 0.0;
  double start_x = 0.0;
  double episode_return = 0.0;
  int episode_steps = 0;
  bool reached_goal = false;
  std::uint64_t episodes = 0;
};

struct TerminationEvent {
  std::int64_t step = 0;  // global control step counter of the batch
  int env = 0;
  Termination reason = Termination::None;
};

// Batch of independent locomotion environments. Each environment owns its
// random stream, so results do not depend on stepping order.
class VecEnv {
 public:
  VecEnv(sim::RobotModel model, EnvConfig config, std::uint64_t seed, int num_envs);

  int size() const { return static_cast<int>(slots_.size()); }
  const EnvConfig& config() const { return config_; }
  const sim::RobotModel& model() const { return model_; }
  const EnvSlot& slot(int i) const { return slots_.at(static_cast<std::size_t>(i)); }
  const course::CurriculumState& curriculum() const { return curriculum_; }
  std::int64_t steps_taken() const { return step_counter_; }

  void set_kind(int env, sim::ObstacleKind kind);
  void set_difficulty(int env, double difficulty);

  // Resets every environment (new episode).
  void reset_all();
  void reset(int env);

  // actions: 12 x size(); clipped to [-1, 1]. Finished environments reset in place.
  void step(const Eigen::MatrixXd& actions, std::vector<StepInfo>& infos);

  // Per-env views of the current state, one column per environment.
  Eigen::MatrixXd observations() const;                 // 45 x N
  Eigen::MatrixXd histories(int steps) const;           // steps*45 x N, oldest first
  Eigen::MatrixXd privileged() const;                   // 17 x N
  Eigen::MatrixXd collision_domains() const;            // 576 x N
  Eigen::MatrixXd body_velocities() const;              // 3 x N
  Eigen::MatrixXd collision_labels() const;             // 17 x N (0/1)

  sim::CollisionDomainGrid collision_domain(int env) const;
  Vec3 body_velocity(int env) const;

  // Termination log, cleared on request.
  const std::vector<TerminationEvent>& termination_log() const { return log_; }
  void enable_termination_log(bool on) { log_enabled_ = on; }
  void clear_termination_log() { log_.clear(); }

  void save(BinaryWriter& w) const;
  void load(BinaryReader& r);

 private:
  StepInfo step_one(int env, const JointVector& action);
  void refresh_observation(EnvSlot& s);
  double obstacle_l(int env) const;

  sim::RobotModel model_;
  EnvConfig config_;
  JointVector soft_min_, soft_max_;
  std::vector<EnvSlot> slots_;
  course::CurriculumState curriculum_;
  std::vector<TerminationEvent> log_;
  bool log_enabled_ = false;
  std::int64_t step_counter_ = 0;
};

// Assigns kinds to `n` environments in proportion to the mix weights.
std::vector<sim::ObstacleKind> assign_kinds(const std::vector<std::pair<sim::ObstacleKind, double>>& mix, int n);

// Heading-rate command used by the yaw reward.
double yaw_rate_command(const EnvConfig& config, double heading_cmd, double yaw);

}  // namespace qclab::task
