#pragma once

#include <optional>

#include "qclab/distill/imagination.hpp"
#include "qclab/ppo/teacher.hpp"

namespace qclab::distill {

// Deployable student: proprioceptive inputs only. The velocity and
// privileged estimators come from phase 1 and stay frozen here.
struct StudentModel {
  nn::Network actor;
  ImaginationModel imagination;
  nn::Network velocity_estimator;
  nn::Network privileged_estimator;
  std::optional<nn::Network> collision_estimator;

  // Actor copied from the teacher, fresh imagination model.
  static StudentModel from_teacher(const ppo::TeacherModel& teacher, std::optional<nn::Network> collision_estimator,
                                   Rng& rng);

  // c_hat from the frozen estimator, zeros without one.
  Matrix collision_estimate(const Matrix& history10) const;

  void save(nn::Checkpoint& ckpt) const;
  static StudentModel load(const nn::Checkpoint& ckpt);
};

// Frozen inputs of one student step.
struct StudentInputs {
  Matrix obs, c_hat, v_hat, e_hat;
};

}  // namespace qclab::distill
