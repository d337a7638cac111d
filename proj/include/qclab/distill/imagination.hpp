#pragma once

#include <vector>

#include "qclab/common/rng.hpp"
#include "qclab/common/types.hpp"
#include "qclab/nn/checkpoint.hpp"
#include "qclab/nn/gru.hpp"
#include "qclab/nn/network.hpp"

namespace qclab::distill {

using nn::Matrix;

inline constexpr int kImaginationInput = kObsDim + kNumFlags;
inline constexpr int kImaginationEmbed = 128;
inline constexpr int kImaginationHidden = 64;

struct ImaginationStepCache {
  nn::ForwardCache embed;
  nn::GruStepCache gru;
};

// concat(o_t, c_hat_t) -> dense 128 (ELU) -> GRU 64; the hidden state is p_hat_t.
class ImaginationModel {
 public:
  ImaginationModel();

  nn::Network embed;
  nn::GruCell gru;

  void init(Rng& rng);

  // h_prev: 64 x B (already reset where episodes restarted). Returns h_t = p_hat_t.
  Matrix step(const Matrix& obs, const Matrix& c_hat, const Matrix& h_prev, ImaginationStepCache* cache) const;

  // Accumulates parameter gradients for dL/dh_t (including the gradient
  // flowing back from later steps); returns dL/dh_prev.
  Matrix backward(const ImaginationStepCache& cache, const Matrix& dh);

  std::vector<nn::ParamRef> params();
  void zero_grad();

  void save(nn::Checkpoint& ckpt, const std::string& prefix = "imagination/") const;
  static ImaginationModel load(const nn::Checkpoint& ckpt, const std::string& prefix = "imagination/");
};

// Zeroes the hidden columns of environments whose episode just ended.
void reset_hidden(Matrix& h, const Eigen::RowVectorXd& dones);

// ||mu_teacher - mu_student||^2 summed over the action dimension, averaged over columns.
struct ImitationLoss {
  double loss = 0.0;
  Matrix grad_student;  // d loss / d mu_student
};
ImitationLoss imitation_loss(const Matrix& teacher_mean, const Matrix& student_mean);

}  // namespace qclab::distill
