#include "qclab/ppo/teacher.hpp"

#include <stdexcept>

#include "qclab/sim/collision_domain.hpp"

namespace qclab::ppo {

nn::Network make_actor(const PolicyArch& arch) {
  return nn::Network(nn::mlp(policy_input::kDim, arch.hidden, kNumJoints, nn::Activation::Elu));
}

nn::Network make_critic(const PolicyArch& arch) {
  return nn::Network(nn::mlp(policy_input::kDim, arch.hidden, 1, nn::Activation::Elu));
}

Matrix assemble_policy_input(const Matrix& obs, const Matrix& c_hat, const Matrix& v_hat, const Matrix& p,
                             const Matrix& e) {
  const Eigen::Index B = obs.cols();
  if (obs.rows() != kObsDim || c_hat.rows() != kNumFlags || v_hat.rows() != 3 || p.rows() != est::kDomainLatent ||
      e.rows() != est::kPrivilegedLatent || c_hat.cols() != B || v_hat.cols() != B || p.cols() != B || e.cols() != B)
    throw std::invalid_argument("assemble_policy_input: shape mismatch");
  Matrix x(policy_input::kDim, B);
  x.middleRows(policy_input::kObs, kObsDim) = obs;
  x.middleRows(policy_input::kCollision, kNumFlags) = c_hat;
  x.middleRows(policy_input::kVelocity, 3) = v_hat;
  x.middleRows(policy_input::kDomain, est::kDomainLatent) = p;
  x.middleRows(policy_input::kPrivileged, est::kPrivilegedLatent) = e;
  return x;
}

TeacherModel::TeacherModel(const PolicyArch& arch)
    : actor(make_actor(arch)),
      critic(make_critic(arch)),
      domain_encoder(est::make_domain_encoder()),
      privileged_encoder(est::make_privileged_encoder()),
      velocity_estimator(est::make_velocity_estimator()),
      privileged_estimator(est::make_privileged_estimator()),
      log_std(nn::Vector::Constant(kNumJoints, arch.init_log_std)),
      log_std_grad(nn::Vector::Zero(kNumJoints)),
      output_scale_(arch.output_scale) {}

void TeacherModel::init(Rng& rng) {
  const double log_std0 = log_std[0];
  actor.init_orthogonal(rng, output_scale_);
  critic.init_orthogonal(rng);
  domain_encoder.init_orthogonal(rng);
  privileged_encoder.init_orthogonal(rng);
  velocity_estimator.init_orthogonal(rng);
  privileged_estimator.init_orthogonal(rng);
  log_std.setConstant(log_std0);
}

TeacherPass TeacherModel::forward(const TeacherInputs& in, bool keep_cache) const {
  TeacherPass pass;
  pass.p = domain_encoder.forward(in.domain, keep_cache ? &pass.domain : nullptr);
  pass.e = privileged_encoder.forward(in.privileged, keep_cache ? &pass.privileged : nullptr);
  pass.state = assemble_policy_input(in.obs, in.c_hat, in.v_hat, pass.p, pass.e);
  pass.mean = actor.forward(pass.state, keep_cache ? &pass.actor : nullptr);
  pass.value = critic.forward(pass.state, keep_cache ? &pass.critic : nullptr);
  return pass;
}

Matrix TeacherModel::act(const TeacherInputs& in) const {
  const Matrix p = domain_encoder.forward(in.domain);
  const Matrix e = privileged_encoder.forward(in.privileged);
  return actor.forward(assemble_policy_input(in.obs, in.c_hat, in.v_hat, p, e));
}

void TeacherModel::backward(const TeacherPass& pass, const Matrix& d_mean, const Eigen::RowVectorXd& d_value,
                            const Matrix* d_e_extra) {
  critic.backward(pass.critic, d_value, false);
  const Matrix dx = actor.backward(pass.actor, d_mean, true);
  domain_encoder.backward(pass.domain, dx.middleRows(policy_input::kDomain, est::kDomainLatent), false);
  Matrix de = dx.middleRows(policy_input::kPrivileged, est::kPrivilegedLatent);
  if (d_e_extra != nullptr) de += *d_e_extra;
  privileged_encoder.backward(pass.privileged, de, false);
}

std::vector<nn::ParamRef> TeacherModel::policy_params() {
  return {{&actor.params(), &actor.grads()},
          {&critic.params(), &critic.grads()},
          {&domain_encoder.params(), &domain_encoder.grads()},
          {&privileged_encoder.params(), &privileged_encoder.grads()},
          {&log_std, &log_std_grad}};
}

void TeacherModel::zero_policy_grads() { nn::zero_grads(policy_params()); }

void TeacherModel::save(nn::Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.put_network(prefix + "actor", actor);
  ckpt.put_network(prefix + "critic", critic);
  ckpt.put_network(prefix + "domain_encoder", domain_encoder);
  ckpt.put_network(prefix + "privileged_encoder", privileged_encoder);
  ckpt.put_network(prefix + "velocity_estimator", velocity_estimator);
  ckpt.put_network(prefix + "privileged_estimator", privileged_estimator);
  ckpt.put_vector(prefix + "log_std", log_std);
}

TeacherModel TeacherModel::load(const nn::Checkpoint& ckpt, const std::string& prefix) {
  TeacherModel m;
  m.actor = ckpt.get_network(prefix + "actor");
  m.critic = ckpt.get_network(prefix + "critic");
  m.domain_encoder = ckpt.get_network(prefix + "domain_encoder");
  m.privileged_encoder = ckpt.get_network(prefix + "privileged_encoder");
  m.velocity_estimator = ckpt.get_network(prefix + "velocity_estimator");
  m.privileged_estimator = ckpt.get_network(prefix + "privileged_estimator");
  m.log_std = ckpt.get_vector(prefix + "log_std");
  if (m.actor.input_size() != policy_input::kDim || m.actor.output_size() != kNumJoints ||
      m.log_std.size() != kNumJoints)
    throw nn::CheckpointError(nn::CheckpointError::Kind::Shape, "teacher checkpoint has unexpected shapes");
  m.log_std_grad = nn::Vector::Zero(kNumJoints);
  return m;
}

bool operator==(const TeacherModel& a, const TeacherModel& b) {
  return a.actor.params() == b.actor.params() && a.critic.params() == b.critic.params() &&
         a.domain_encoder.params() == b.domain_encoder.params() &&
         a.privileged_encoder.params() == b.privileged_encoder.params() &&
         a.velocity_estimator.params() == b.velocity_estimator.params() &&
         a.privileged_estimator.params() == b.privileged_estimator.params() && a.log_std == b.log_std;
}

}  // namespace qclab::ppo
