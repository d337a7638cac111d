#include "qclab/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace qclab::nn {

double grad_norm(const std::vector<ParamRef>& refs) {
  double s = 0.0;
  for (const auto& r : refs) s += r.grads->squaredNorm();
  return std::sqrt(s);
}

double clip_grad_norm(const std::vector<ParamRef>& refs, double max_norm) {
  const double n = grad_norm(refs);
  if (n > max_norm && n > 0.0) {
    const double k = max_norm / n;
    for (const auto& r : refs) *r.grads *= k;
  }
  return n;
}

void zero_grads(const std::vector<ParamRef>& refs) {
  for (const auto& r : refs) r.grads->setZero();
}

bool grads_finite(const std::vector<ParamRef>& refs) {
  for (const auto& r : refs)
    if (!r.grads->allFinite()) return false;
  return true;
}

Adam::Adam(std::vector<ParamRef> refs, AdamConfig config) : config_(config) {
  rebind(std::move(refs));
  m_ = Vector::Zero(static_cast<Eigen::Index>(size()));
  v_ = m_;
}

void Adam::rebind(std::vector<ParamRef> refs) {
  Eigen::Index n = 0;
  for (const auto& r : refs) {
    if (r.values->size() != r.grads->size()) throw std::invalid_argument("Adam: value/grad size mismatch");
    n += r.values->size();
  }
  if (m_.size() != 0 && m_.size() != n) throw std::invalid_argument("Adam::rebind: size changed");
  refs_ = std::move(refs);
  if (m_.size() == 0) {
    m_ = Vector::Zero(n);
    v_ = Vector::Zero(n);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  Eigen::Index off = 0;
  for (const auto& r : refs_) {
    const Eigen::Index n = r.values->size();
    auto m = m_.segment(off, n);
    auto v = v_.segment(off, n);
    const Vector& g = *r.grads;
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseAbs2();
    r.values->array() -= config_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config_.eps);
    off += n;
  }
}

void Adam::save(BinaryWriter& w) const {
  w.i64(t_);
  w.f64(config_.lr);
  w.u64(static_cast<std::uint64_t>(m_.size()));
  w.f64s({m_.data(), static_cast<std::size_t>(m_.size())});
  w.f64s({v_.data(), static_cast<std::size_t>(v_.size())});
}

void Adam::load(BinaryReader& r) {
  t_ = r.i64();
  config_.lr = r.f64();
  const std::uint64_t n = r.u64();
  if (n != static_cast<std::uint64_t>(m_.size())) throw std::runtime_error("Adam state size mismatch");
  r.f64s({m_.data(), static_cast<std::size_t>(n)});
  r.f64s({v_.data(), static_cast<std::size_t>(n)});
}

}  // namespace qclab::nn
