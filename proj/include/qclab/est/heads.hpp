#pragma once

#include "qclab/nn/network.hpp"

namespace qclab::est {

inline constexpr int kCollisionHistory = 10;
inline constexpr int kPrivilegedHistory = 6;
inline constexpr int kDomainLatent = 64;
inline constexpr int kPrivilegedLatent = 32;
inline constexpr int kEstimatorChannels = 32;

// Linear per frame, three temporal convolutions (kernels 4, 3, 2 for a
// 10-step history; all 1 for a single frame), linear to 17 logits.
nn::Network make_collision_estimator(int history = kCollisionHistory, int channels = kEstimatorChannels);

// 45 -> [128, 64] -> 3 body-frame velocity.
nn::Network make_velocity_estimator();

// g_t (17) -> [64] -> e_t (32).
nn::Network make_privileged_encoder();

// 6-step history, convolutions 3/2/2 after a per-frame linear layer -> e_hat (32).
nn::Network make_privileged_estimator(int channels = kEstimatorChannels);

// h_t (576 cells) -> [256, 128] -> p_t (64).
nn::Network make_domain_encoder();

}  // namespace qclab::est
