#include "qclab/nn/gru.hpp"

#include <cmath>
#include <stdexcept>

namespace qclab::nn {

namespace {
Matrix sigmoid(const Matrix& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}
}  // namespace

GruCell::GruCell(int input_size, int hidden_size) : input_(input_size), hidden_(hidden_size) {
  if (input_size <= 0 || hidden_size <= 0) throw std::invalid_argument("GruCell: non-positive size");
  const Eigen::Index n = 3 * static_cast<Eigen::Index>(hidden_) * (input_ + hidden_ + 2);
  params_ = Vector::Zero(n);
  grads_ = Vector::Zero(n);
}

void GruCell::init_orthogonal(Rng& rng) {
  params_.setZero();
  auto wi = w_ih();
  auto wh = w_hh();
  for (int g = 0; g < 3; ++g) {
    wi.middleRows(g * hidden_, hidden_) = orthogonal(hidden_, input_, rng, 1.0);
    wh.middleRows(g * hidden_, hidden_) = orthogonal(hidden_, hidden_, rng, 1.0);
  }
}

Matrix GruCell::step(const Matrix& x, const Matrix& h, GruStepCache* cache) const {
  if (x.rows() != input_ || h.rows() != hidden_ || x.cols() != h.cols())
    throw std::invalid_argument("GruCell::step: shape mismatch");
  const int H = hidden_;
  Matrix gi = cw_ih() * x;
  gi.colwise() += cb_ih();
  Matrix gh = cw_hh() * h;
  gh.colwise() += cb_hh();
  const Matrix r = sigmoid(gi.topRows(H) + gh.topRows(H));
  const Matrix z = sigmoid(gi.middleRows(H, H) + gh.middleRows(H, H));
  const Matrix hn = gh.bottomRows(H);
  const Matrix n = (gi.bottomRows(H).array() + r.array() * hn.array()).tanh().matrix();
  Matrix out = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
  if (cache) *cache = {x, h, r, z, n, hn};
  return out;
}

void GruCell::backward(const GruStepCache& c, const Matrix& dh_next, Matrix* dx, Matrix* dh) {
  const int H = hidden_;
  const auto dn = (dh_next.array() * (1.0 - c.z.array())).eval();
  const auto dz = (dh_next.array() * (c.h.array() - c.n.array())).eval();
  const auto dn_pre = (dn * (1.0 - c.n.array().square())).eval();
  const auto dr = (dn_pre * c.hn.array()).eval();
  const auto dhn = (dn_pre * c.r.array()).eval();
  const auto dr_pre = (dr * c.r.array() * (1.0 - c.r.array())).eval();
  const auto dz_pre = (dz * c.z.array() * (1.0 - c.z.array())).eval();

  const Eigen::Index B = dh_next.cols();
  Matrix gi(3 * H, B), gh(3 * H, B);
  gi.topRows(H) = dr_pre.matrix();
  gi.middleRows(H, H) = dz_pre.matrix();
  gi.bottomRows(H) = dn_pre.matrix();
  gh.topRows(H) = dr_pre.matrix();
  gh.middleRows(H, H) = dz_pre.matrix();
  gh.bottomRows(H) = dhn.matrix();

  const Eigen::Index nih = 3 * static_cast<Eigen::Index>(H) * input_;
  const Eigen::Index nhh = 3 * static_cast<Eigen::Index>(H) * H;
  Eigen::Map<Matrix>(grads_.data(), 3 * H, input_).noalias() += gi * c.x.transpose();
  Eigen::Map<Matrix>(grads_.data() + nih, 3 * H, H).noalias() += gh * c.h.transpose();
  Eigen::Map<Vector>(grads_.data() + nih + nhh, 3 * H) += gi.rowwise().sum();
  Eigen::Map<Vector>(grads_.data() + nih + nhh + 3 * H, 3 * H) += gh.rowwise().sum();

  if (dx) *dx = cw_ih().transpose() * gi;
  if (dh) {
    Matrix out = (dh_next.array() * c.z.array()).matrix();
    out.noalias() += cw_hh().transpose() * gh;
    *dh = std::move(out);
  }
}

}  // namespace qclab::nn
