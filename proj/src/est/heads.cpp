#include "qclab/est/heads.hpp"

#include <stdexcept>

#include "qclab/common/types.hpp"
#include "qclab/sim/collision_domain.hpp"

namespace qclab::est {

using nn::Activation;

nn::Network make_collision_estimator(int history, int channels) {
  if (history < 1) throw std::invalid_argument("collision estimator: history must be >= 1");
  std::vector<nn::LayerSpec> layers;
  layers.push_back(nn::conv_time(kObsDim, channels, 1, history, Activation::Elu));
  int steps = history;
  const int kernels[3] = {4, 3, 2};
  for (int k : kernels) {
    const int kernel = history >= 10 ? k : 1;
    layers.push_back(nn::conv_time(channels, channels, kernel, steps, Activation::Elu));
    steps = steps - kernel + 1;
  }
  layers.push_back(nn::dense(channels * steps, kNumFlags, Activation::None));
  return nn::Network(std::move(layers));
}

nn::Network make_velocity_estimator() { return nn::Network(nn::mlp(kObsDim, {128, 64}, 3, Activation::Elu)); }

nn::Network make_privileged_encoder() {
  return nn::Network(nn::mlp(kPrivDim, {64}, kPrivilegedLatent, Activation::Elu));
}

nn::Network make_privileged_estimator(int channels) {
  std::vector<nn::LayerSpec> layers;
  int steps = kPrivilegedHistory;
  layers.push_back(nn::conv_time(kObsDim, channels, 1, steps, Activation::Elu));
  for (int k : {3, 2, 2}) {
    layers.push_back(nn::conv_time(channels, channels, k, steps, Activation::Elu));
    steps = steps - k + 1;
  }
  layers.push_back(nn::dense(channels * steps, kPrivilegedLatent, Activation::None));
  return nn::Network(std::move(layers));
}

nn::Network make_domain_encoder() {
  return nn::Network(nn::mlp(sim::CollisionDomainGrid::kCells, {256, 128}, kDomainLatent, Activation::Elu));
}

}  // namespace qclab::est
