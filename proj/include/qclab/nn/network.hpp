#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qclab/common/rng.hpp"

namespace qclab::nn {

// Batches are stored feature-major: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation : int { None = 0, Elu = 1, Tanh = 2, Sigmoid = 3 };

std::string_view activation_name(Activation a);

enum class LayerKind : int { Dense = 0, Conv1dTime = 1 };

// Dense: in -> out.
// Conv1dTime: input is `steps` frames of `in` channels laid out time-major
// (row t * in + c); output is steps - kernel + 1 frames of `out` channels,
// stride 1, no padding. A kernel of 1 applies the same dense map to every frame.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in = 0;
  int out = 0;
  int kernel = 1;
  int steps = 1;
  Activation activation = Activation::None;

  int input_size() const { return kind == LayerKind::Dense ? in : in * steps; }
  int output_steps() const { return kind == LayerKind::Dense ? 1 : steps - kernel + 1; }
  int output_size() const { return out * output_steps(); }
  std::size_t weight_count() const { return static_cast<std::size_t>(out) * in * (kind == LayerKind::Dense ? 1 : kernel); }
  std::size_t parameter_count() const { return weight_count() + out; }

  bool operator==(const LayerSpec&) const = default;
};

LayerSpec dense(int in, int out, Activation act);
LayerSpec conv_time(int in_channels, int out_channels, int kernel, int steps, Activation act);

// MLP helper: in -> hidden... -> out with `hidden_act` on hidden layers.
std::vector<LayerSpec> mlp(int in, const std::vector<int>& hidden, int out, Activation hidden_act,
                           Activation out_act = Activation::None);

struct ForwardCache {
  // outputs[0] is the input, outputs[i + 1] the activated output of layer i.
  std::vector<Matrix> outputs;
};

class Network {
 public:
  Network() = default;
  explicit Network(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int input_size() const { return layers_.front().input_size(); }
  int output_size() const { return layers_.back().output_size(); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
  bool empty() const { return layers_.empty(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }
  Vector& grads() { return grads_; }
  const Vector& grads() const { return grads_; }
  void zero_grad() { grads_.setZero(); }

  // Orthogonal weights with gain sqrt(2) on ELU layers and 1 elsewhere,
  // zero biases; the last layer's weights are additionally scaled by
  // `output_scale`.
  void init_orthogonal(Rng& rng, double output_scale = 1.0);

  // x: input_size x batch. Pure; fills `cache` when given.
  Matrix forward(const Matrix& x, ForwardCache* cache = nullptr) const;

  // Accumulates parameter gradients for upstream gradient `dy` and returns
  // the gradient with respect to the input (empty when `input_grad` is false).
  Matrix backward(const ForwardCache& cache, const Matrix& dy, bool input_grad = true);

  Eigen::Map<Matrix> weight(std::size_t layer);
  Eigen::Map<Vector> bias(std::size_t layer);
  Eigen::Map<const Matrix> weight(std::size_t layer) const;
  Eigen::Map<const Vector> bias(std::size_t layer) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  Vector params_;
  Vector grads_;
};

void apply_activation(Activation a, Matrix& z);
// Multiplies `d` in place by the activation derivative expressed through the
// activated output `y`.
void activation_backward(Activation a, const Matrix& y, Matrix& d);

// Orthogonal (rows x cols) matrix scaled by `gain`.
Matrix orthogonal(int rows, int cols, Rng& rng, double gain);

}  // namespace qclab::nn
