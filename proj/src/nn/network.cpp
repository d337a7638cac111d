#include "qclab/nn/network.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qclab::nn {

std::string_view activation_name(Activation a) {
  static constexpr std::array<std::string_view, 4> kNames = {"none", "elu", "tanh", "sigmoid"};
  return kNames.at(static_cast<std::size_t>(a));
}

LayerSpec dense(int in, int out, Activation act) { return {LayerKind::Dense, in, out, 1, 1, act}; }

LayerSpec conv_time(int in_channels, int out_channels, int kernel, int steps, Activation act) {
  return {LayerKind::Conv1dTime, in_channels, out_channels, kernel, steps, act};
}

std::vector<LayerSpec> mlp(int in, const std::vector<int>& hidden, int out, Activation hidden_act,
                           Activation out_act) {
  std::vector<LayerSpec> layers;
  int prev = in;
  for (int h : hidden) {
    layers.push_back(dense(prev, h, hidden_act));
    prev = h;
  }
  layers.push_back(dense(prev, out, out_act));
  return layers;
}

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Network: no layers");
  std::size_t total = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    if (l.in <= 0 || l.out <= 0 || l.kernel <= 0 || l.steps <= 0)
      throw std::invalid_argument("Network: non-positive layer dimension");
    if (l.kind == LayerKind::Conv1dTime && l.kernel > l.steps)
      throw std::invalid_argument("Network: conv kernel longer than the history");
    if (i > 0 && layers_[i - 1].output_size() != l.input_size())
      throw std::invalid_argument("Network: layer " + std::to_string(i) + " expects " +
                                  std::to_string(l.input_size()) + " inputs, previous layer gives " +
                                  std::to_string(layers_[i - 1].output_size()));
    offsets_.push_back(total);
    total += l.parameter_count();
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(total));
  grads_ = Vector::Zero(static_cast<Eigen::Index>(total));
}

Eigen::Map<Matrix> Network::weight(std::size_t i) {
  const LayerSpec& l = layers_.at(i);
  return {params_.data() + offsets_[i], l.out, static_cast<Eigen::Index>(l.weight_count() / l.out)};
}
Eigen::Map<Vector> Network::bias(std::size_t i) {
  const LayerSpec& l = layers_.at(i);
  return {params_.data() + offsets_[i] + l.weight_count(), l.out};
}
Eigen::Map<const Matrix> Network::weight(std::size_t i) const {
  const LayerSpec& l = layers_.at(i);
  return {params_.data() + offsets_[i], l.out, static_cast<Eigen::Index>(l.weight_count() / l.out)};
}
Eigen::Map<const Vector> Network::bias(std::size_t i) const {
  const LayerSpec& l = layers_.at(i);
  return {params_.data() + offsets_[i] + l.weight_count(), l.out};
}

Matrix orthogonal(int rows, int cols, Rng& rng, double gain) {
  const int n = std::max(rows, cols), m = std::min(rows, cols);
  Matrix a(n, m);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, m);
  const Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  Matrix out = rows >= cols ? q : Matrix(q.transpose());
  return gain * out;
}

void Network::init_orthogonal(Rng& rng, double output_scale) {
  params_.setZero();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto w = weight(i);
    const double gain = layers_[i].activation == Activation::Elu ? std::sqrt(2.0) : 1.0;
    w = orthogonal(static_cast<int>(w.rows()), static_cast<int>(w.cols()), rng, gain);
    if (i + 1 == layers_.size()) w *= output_scale;
  }
}

void apply_activation(Activation a, Matrix& z) {
  switch (a) {
    case Activation::None: break;
    // branch-free so Eigen vectorizes it
    case Activation::Elu: z.array() = z.array().max(0.0) + (z.array().min(0.0).exp() - 1.0); break;
    case Activation::Tanh: z = z.array().tanh().matrix(); break;
    case Activation::Sigmoid: z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }); break;
  }
}

void activation_backward(Activation a, const Matrix& y, Matrix& d) {
  switch (a) {
    case Activation::None: break;
    case Activation::Elu:
      d.array() *= (y.array() + 1.0).min(1.0);
      break;
    case Activation::Tanh: d.array() *= 1.0 - y.array().square(); break;
    case Activation::Sigmoid: d.array() *= y.array() * (1.0 - y.array()); break;
  }
}

Matrix Network::forward(const Matrix& x, ForwardCache* cache) const {
  if (x.rows() != input_size())
    throw std::invalid_argument("Network::forward: got " + std::to_string(x.rows()) + " inputs, expected " +
                                std::to_string(input_size()));
  if (cache) {
    cache->outputs.resize(layers_.size() + 1);
    cache->outputs[0] = x;
  }
  Matrix h;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    const Matrix& in = i == 0 ? x : h;
    const auto w = weight(i);
    const auto b = bias(i);
    Matrix z(l.output_size(), in.cols());
    if (l.kind == LayerKind::Dense) {
      z.noalias() = w * in;
      z.colwise() += b;
    } else {
      for (int t = 0; t < l.output_steps(); ++t) {
        auto zt = z.middleRows(t * l.out, l.out);
        zt.noalias() = w * in.middleRows(t * l.in, l.kernel * l.in);
        zt.colwise() += b;
      }
    }
    apply_activation(l.activation, z);
    h = std::move(z);
    if (cache) cache->outputs[i + 1] = h;
  }
  return h;
}

Matrix Network::backward(const ForwardCache& cache, const Matrix& dy, bool input_grad) {
  if (cache.outputs.size() != layers_.size() + 1) throw std::logic_error("Network::backward: stale cache");
  Matrix d = dy;
  for (std::size_t ii = layers_.size(); ii-- > 0;) {
    const LayerSpec& l = layers_[ii];
    const Matrix& x = cache.outputs[ii];
    activation_backward(l.activation, cache.outputs[ii + 1], d);
    const auto w = weight(ii);
    Eigen::Map<Matrix> gw(grads_.data() + offsets_[ii], w.rows(), w.cols());
    Eigen::Map<Vector> gb(grads_.data() + offsets_[ii] + l.weight_count(), l.out);
    const bool need_dx = ii > 0 || input_grad;
    Matrix dx;
    if (l.kind == LayerKind::Dense) {
      gw.noalias() += d * x.transpose();
      gb += d.rowwise().sum();
      if (need_dx) dx.noalias() = w.transpose() * d;
    } else {
      if (need_dx) dx = Matrix::Zero(x.rows(), x.cols());
      for (int t = 0; t < l.output_steps(); ++t) {
        const auto dt = d.middleRows(t * l.out, l.out);
        gw.noalias() += dt * x.middleRows(t * l.in, l.kernel * l.in).transpose();
        gb += dt.rowwise().sum();
        if (need_dx) dx.middleRows(t * l.in, l.kernel * l.in).noalias() += w.transpose() * dt;
      }
    }
    d = std::move(dx);
  }
  return d;
}

}  // namespace qclab::nn
