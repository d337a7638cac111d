#include "qclab/distill/student.hpp"

#include "qclab/est/losses.hpp"

namespace qclab::distill {

StudentModel StudentModel::from_teacher(const ppo::TeacherModel& teacher, std::optional<nn::Network> collision,
                                        Rng& rng) {
  StudentModel s;
  s.actor = teacher.actor;
  s.imagination.init(rng);
  s.velocity_estimator = teacher.velocity_estimator;
  s.privileged_estimator = teacher.privileged_estimator;
  s.collision_estimator = std::move(collision);
  return s;
}

Matrix StudentModel::collision_estimate(const Matrix& history10) const {
  if (!collision_estimator) return Matrix::Zero(kNumFlags, history10.cols());
  return est::sigmoid(collision_estimator->forward(history10));
}

void StudentModel::save(nn::Checkpoint& ckpt) const {
  ckpt.put_network("student/actor", actor);
  imagination.save(ckpt);
  ckpt.put_network("student/velocity_estimator", velocity_estimator);
  ckpt.put_network("student/privileged_estimator", privileged_estimator);
  if (collision_estimator) ckpt.put_network("estimator/collision", *collision_estimator);
}

StudentModel StudentModel::load(const nn::Checkpoint& ckpt) {
  StudentModel s;
  s.actor = ckpt.get_network("student/actor");
  s.imagination = ImaginationModel::load(ckpt);
  s.velocity_estimator = ckpt.get_network("student/velocity_estimator");
  s.privileged_estimator = ckpt.get_network("student/privileged_estimator");
  if (ckpt.has("estimator/collision")) s.collision_estimator = ckpt.get_network("estimator/collision");
  if (s.actor.input_size() != ppo::policy_input::kDim || s.actor.output_size() != kNumJoints)
    throw nn::CheckpointError(nn::CheckpointError::Kind::Shape, "student actor has unexpected shapes");
  return s;
}

}  // namespace qclab::distill
