#include "qclab/distill/imagination.hpp"

#include <stdexcept>

namespace qclab::distill {

ImaginationModel::ImaginationModel()
    : embed({nn::dense(kImaginationInput, kImaginationEmbed, nn::Activation::Elu)}),
      gru(kImaginationEmbed, kImaginationHidden) {}

void ImaginationModel::init(Rng& rng) {
  embed.init_orthogonal(rng);
  gru.init_orthogonal(rng);
}

Matrix ImaginationModel::step(const Matrix& obs, const Matrix& c_hat, const Matrix& h_prev,
                              ImaginationStepCache* cache) const {
  Matrix x(kImaginationInput, obs.cols());
  x.topRows(kObsDim) = obs;
  x.bottomRows(kNumFlags) = c_hat;
  const Matrix z = embed.forward(x, cache ? &cache->embed : nullptr);
  return gru.step(z, h_prev, cache ? &cache->gru : nullptr);
}

Matrix ImaginationModel::backward(const ImaginationStepCache& cache, const Matrix& dh) {
  Matrix dz, dh_prev;
  gru.backward(cache.gru, dh, &dz, &dh_prev);
  embed.backward(cache.embed, dz, false);
  return dh_prev;
}

std::vector<nn::ParamRef> ImaginationModel::params() {
  return {{&embed.params(), &embed.grads()}, {&gru.params(), &gru.grads()}};
}

void ImaginationModel::zero_grad() {
  embed.zero_grad();
  gru.zero_grad();
}

void ImaginationModel::save(nn::Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.put_network(prefix + "embed", embed);
  ckpt.put_gru(prefix + "gru", gru);
}

ImaginationModel ImaginationModel::load(const nn::Checkpoint& ckpt, const std::string& prefix) {
  ImaginationModel m;
  m.embed = ckpt.get_network(prefix + "embed");
  m.gru = ckpt.get_gru(prefix + "gru");
  if (m.embed.input_size() != kImaginationInput || m.gru.hidden_size() != kImaginationHidden ||
      m.gru.input_size() != m.embed.output_size())
    throw nn::CheckpointError(nn::CheckpointError::Kind::Shape, "imagination model has unexpected shapes");
  return m;
}

void reset_hidden(Matrix& h, const Eigen::RowVectorXd& dones) {
  if (dones.size() != h.cols()) throw std::invalid_argument("reset_hidden: size mismatch");
  for (Eigen::Index i = 0; i < h.cols(); ++i)
    if (dones[i] != 0.0) h.col(i).setZero();
}

ImitationLoss imitation_loss(const Matrix& teacher, const Matrix& student) {
  if (teacher.rows() != student.rows() || teacher.cols() != student.cols())
    throw std::invalid_argument("imitation_loss: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(student.cols());
  const Matrix d = student - teacher;
  return {d.squaredNorm() * inv_b, 2.0 * inv_b * d};
}

}  // namespace qclab::distill
