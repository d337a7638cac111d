#pragma once

#include <vector>

#include "qclab/common/rng.hpp"
#include "qclab/common/types.hpp"
#include "qclab/est/heads.hpp"
#include "qclab/nn/adam.hpp"
#include "qclab/nn/checkpoint.hpp"
#include "qclab/nn/network.hpp"

namespace qclab::ppo {

using nn::Matrix;

// Policy input [o_t, c_hat_t, v_hat_t, p_t, e_t]; the student feeds the
// imagined latent and the estimated privileged latent in the same slots.
namespace policy_input {
inline constexpr int kObs = 0;
inline constexpr int kCollision = kObs + kObsDim;
inline constexpr int kVelocity = kCollision + kNumFlags;
inline constexpr int kDomain = kVelocity + 3;
inline constexpr int kPrivileged = kDomain + est::kDomainLatent;
inline constexpr int kDim = kPrivileged + est::kPrivilegedLatent;
}  // namespace policy_input

struct PolicyArch {
  std::vector<int> hidden{512, 256, 128};
  double output_scale = 0.01;
  double init_log_std = -2.0;
};

nn::Network make_actor(const PolicyArch& arch);
nn::Network make_critic(const PolicyArch& arch);

Matrix assemble_policy_input(const Matrix& obs, const Matrix& c_hat, const Matrix& v_hat, const Matrix& p,
                             const Matrix& e);

// Feature-major batch of raw teacher inputs.
struct TeacherInputs {
  Matrix obs;         // 45 x B
  Matrix c_hat;       // 17 x B (zeros when the collision estimate is ablated)
  Matrix v_hat;       // 3 x B
  Matrix privileged;  // g_t, 17 x B
  Matrix domain;      // h_t, 576 x B
};

struct TeacherPass {
  Matrix p, e, state, mean;
  Eigen::RowVectorXd value;
  nn::ForwardCache actor, critic, domain, privileged;
};

class TeacherModel {
 public:
  explicit TeacherModel(const PolicyArch& arch = {});

  nn::Network actor;
  nn::Network critic;
  nn::Network domain_encoder;
  nn::Network privileged_encoder;
  nn::Network velocity_estimator;
  nn::Network privileged_estimator;
  nn::Vector log_std;
  nn::Vector log_std_grad;

  void init(Rng& rng);

  TeacherPass forward(const TeacherInputs& in, bool keep_cache) const;
  // Policy mean only.
  Matrix act(const TeacherInputs& in) const;

  // Backpropagates action-mean and value gradients. The critic sees the
  // encoded latents as constants; the actor gradient and `d_e_extra`
  // (e.g. the ROA pull on e_t) reach the encoders.
  void backward(const TeacherPass& pass, const Matrix& d_mean, const Eigen::RowVectorXd& d_value,
                const Matrix* d_e_extra);

  // Parameters optimized by the PPO loss.
  std::vector<nn::ParamRef> policy_params();
  void zero_policy_grads();

  void save(nn::Checkpoint& ckpt, const std::string& prefix = "teacher/") const;
  static TeacherModel load(const nn::Checkpoint& ckpt, const std::string& prefix = "teacher/");

 private:
  double output_scale_ = 0.01;
};

bool operator==(const TeacherModel& a, const TeacherModel& b);

}  // namespace qclab::ppo
