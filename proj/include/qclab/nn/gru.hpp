#pragma once

#include "qclab/nn/network.hpp"

namespace qclab::nn {

struct GruStepCache {
  Matrix x, h, r, z, n, hn;
};

// Gated recurrent unit, gate order (r, z, n):
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
class GruCell {
 public:
  GruCell() = default;
  GruCell(int input_size, int hidden_size);

  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  Vector& grads() { return grads_; }
  const Vector& grads() const { return grads_; }
  void zero_grad() { grads_.setZero(); }

  // Orthogonal input and recurrent blocks per gate, zero biases.
  void init_orthogonal(Rng& rng);

  // x: input x batch, h: hidden x batch.
  Matrix step(const Matrix& x, const Matrix& h, GruStepCache* cache = nullptr) const;

  // Accumulates parameter gradients; writes input and previous-hidden gradients.
  void backward(const GruStepCache& cache, const Matrix& dh_next, Matrix* dx, Matrix* dh);

  Eigen::Map<Matrix> w_ih() { return {params_.data(), 3 * hidden_, input_}; }
  Eigen::Map<Matrix> w_hh() { return {params_.data() + 3 * hidden_ * input_, 3 * hidden_, hidden_}; }
  Eigen::Map<Vector> b_ih() { return {params_.data() + 3 * hidden_ * (input_ + hidden_), 3 * hidden_}; }
  Eigen::Map<Vector> b_hh() { return {params_.data() + 3 * hidden_ * (input_ + hidden_ + 1), 3 * hidden_}; }

 private:
  Eigen::Map<const Matrix> cw_ih() const { return {params_.data(), 3 * hidden_, input_}; }
  Eigen::Map<const Matrix> cw_hh() const { return {params_.data() + 3 * hidden_ * input_, 3 * hidden_, hidden_}; }
  Eigen::Map<const Vector> cb_ih() const { return {params_.data() + 3 * hidden_ * (input_ + hidden_), 3 * hidden_}; }
  Eigen::Map<const Vector> cb_hh() const {
    return {params_.data() + 3 * hidden_ * (input_ + hidden_ + 1), 3 * hidden_};
  }

  int input_ = 0;
  int hidden_ = 0;
  Vector params_;
  Vector grads_;
};

}  // namespace qclab::nn
