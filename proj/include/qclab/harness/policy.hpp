#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qclab/distill/student.hpp"
#include "qclab/ppo/teacher.hpp"
#include "qclab/task/env.hpp"
#include "qclab/task/scripted.hpp"

namespace qclab::harness {

using nn::Matrix;

// Deterministic controller driving a VecEnv: mean actions only.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Called before the first step on a fresh batch.
  virtual void begin(int num_envs) { (void)num_envs; }
  virtual Matrix act(const task::VecEnv& env) = 0;
  // Called after every env step.
  virtual void after_step(const std::vector<task::StepInfo>& infos) { (void)infos; }
};

class ZeroPolicy : public Policy {
 public:
  std::string name() const override { return "zero"; }
  Matrix act(const task::VecEnv& env) override;
};

// Trot with heading and lateral feedback read from the simulator state.
class ScriptedPolicy : public Policy {
 public:
  ScriptedPolicy();
  std::string name() const override { return "scripted"; }
  Matrix act(const task::VecEnv& env) override;

  task::TrotGait gait;
  double heading_gain = 0.5;
};

class TeacherPolicy : public Policy {
 public:
  TeacherPolicy(ppo::TeacherModel model, std::optional<nn::Network> collision_estimator, bool use_collision);
  std::string name() const override { return "teacher"; }
  Matrix act(const task::VecEnv& env) override;

 private:
  ppo::TeacherModel model_;
  std::optional<nn::Network> collision_;
  bool use_collision_;
};

class StudentPolicy : public Policy {
 public:
  explicit StudentPolicy(distill::StudentModel model);
  std::string name() const override { return "student"; }
  void begin(int num_envs) override;
  Matrix act(const task::VecEnv& env) override;
  void after_step(const std::vector<task::StepInfo>& infos) override;

  // Imagined latent of the last act() call, 64 x N.
  const Matrix& hidden() const { return hidden_; }

 private:
  distill::StudentModel model_;
  Matrix hidden_;
};

}  // namespace qclab::harness
