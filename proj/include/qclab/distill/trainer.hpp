#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qclab/distill/student.hpp"
#include "qclab/nn/adam.hpp"
#include "qclab/ppo/teacher.hpp"
#include "qclab/task/env.hpp"

namespace qclab::distill {

struct DistillConfig {
  int envs = 256;
  int horizon = 24;
  int epochs = 2;  // BPTT passes per rollout
  double lr = 1e-4;
  double latent_weight = 0.5;
  double max_grad_norm = 1.0;
  // Gaussian exploration noise on the student's actions
  double action_noise = 0.0;
};

struct DistillMetrics {
  int iteration = 0;
  double imitation_loss = 0.0;  // first pass of the update, before any step
  double latent_loss = 0.0;
  double mean_reward = 0.0;
  int episodes = 0;
  double success_rate = 0.0;
  bool update_skipped = false;
};

std::string distill_csv_header();
std::string distill_csv_row(const DistillMetrics& m);

// One student rollout with stored frozen inputs and teacher targets.
struct DistillRollout {
  int horizon = 0;
  std::vector<StudentInputs> inputs;
  std::vector<Matrix> teacher_mean;  // 12 x N
  std::vector<Matrix> latent_target;  // p_t, 64 x N
  std::vector<Eigen::RowVectorXd> dones;
  Matrix h0;  // hidden before the first step
};

struct DistillLoss {
  double imitation = 0.0;
  double latent = 0.0;
};

// Loss over a rollout window (averaged over steps) with BPTT gradients
// accumulated into the student actor and imagination model.
DistillLoss distill_loss_and_grad(StudentModel& student, const DistillRollout& rollout, double latent_weight,
                                  bool accumulate);

// On-policy distillation: the student drives the environments, the frozen
// teacher labels every visited state.
class DistillTrainer {
 public:
  DistillTrainer(sim::RobotModel model, task::EnvConfig env, DistillConfig config, ppo::TeacherModel teacher,
                 StudentModel student, std::uint64_t seed);

  DistillMetrics iterate();
  int iteration() const { return iteration_; }
  const StudentModel& student() const { return student_; }
  const ppo::TeacherModel& teacher() const { return teacher_; }
  task::VecEnv& env() { return env_; }

  void collect(DistillRollout& rollout, DistillMetrics& m);

  nn::Checkpoint save_state() const;
  void load_state(const nn::Checkpoint& ckpt);

 private:
  std::vector<nn::ParamRef> refs();

  DistillConfig config_;
  task::VecEnv env_;
  const ppo::TeacherModel teacher_;
  StudentModel student_;
  nn::Adam opt_;
  Matrix hidden_;
  Rng rng_;
  int iteration_ = 0;
};

// Mean absolute per-joint difference between the teacher and student action
// means on states visited by the deterministic teacher.
double student_action_error(const sim::RobotModel& model, const task::EnvConfig& env, const ppo::TeacherModel& teacher,
                            const StudentModel& student, std::uint64_t seed, int envs, int steps);

}  // namespace qclab::distill
