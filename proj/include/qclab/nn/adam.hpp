#pragma once

#include <cstdint>
#include <vector>

#include "qclab/common/binary_io.hpp"
#include "qclab/nn/network.hpp"

namespace qclab::nn {

// A parameter vector and its gradient buffer, owned elsewhere.
struct ParamRef {
  Vector* values = nullptr;
  Vector* grads = nullptr;
};

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

double grad_norm(const std::vector<ParamRef>& refs);
// Rescales every gradient so the global norm is at most `max_norm`; returns the pre-clip norm.
double clip_grad_norm(const std::vector<ParamRef>& refs, double max_norm);
void zero_grads(const std::vector<ParamRef>& refs);
bool grads_finite(const std::vector<ParamRef>& refs);

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<ParamRef> refs, AdamConfig config);

  // Bias-corrected update from the current gradients.
  void step();

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  std::int64_t steps() const { return t_; }
  std::size_t size() const { return static_cast<std::size_t>(m_.size()); }

  void save(BinaryWriter& w) const;
  // Throws std::runtime_error when the stored sizes do not match.
  void load(BinaryReader& r);

  // Re-points the optimizer at new storage of identical sizes (after moves).
  void rebind(std::vector<ParamRef> refs);

 private:
  std::vector<ParamRef> refs_;
  AdamConfig config_;
  Vector m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace qclab::nn
