#pragma once

#include <Eigen/Dense>

#include "qclab/common/binary_io.hpp"

namespace qclab::ppo {

// Running variance by parallel (Chan) merges of batch moments.
struct RunningStat {
  double mean = 0.0;
  double m2 = 0.0;
  double count = 0.0;

  void update(const Eigen::VectorXd& batch);
  double variance() const { return count > 1.0 ? m2 / count : 0.0; }
};

// Divides rewards by the running standard deviation of the per-environment
// discounted return; the mean is not subtracted.
class RewardNormalizer {
 public:
  RewardNormalizer() = default;
  RewardNormalizer(int num_envs, double gamma, double eps = 1e-8);

  // rewards and dones are per environment for one step.
  Eigen::VectorXd normalize(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones);
  double scale() const;
  const RunningStat& stat() const { return stat_; }

  void save(BinaryWriter& w) const;
  void load(BinaryReader& r);

 private:
  double gamma_ = 0.99;
  double eps_ = 1e-8;
  Eigen::VectorXd returns_;
  RunningStat stat_;
};

}  // namespace qclab::ppo
