#include "qclab/ppo/normalizer.hpp"

#include <cmath>
#include <stdexcept>

namespace qclab::ppo {

void RunningStat::update(const Eigen::VectorXd& batch) {
  const double n = static_cast<double>(batch.size());
  if (n == 0.0) return;
  const double bmean = batch.mean();
  const double bm2 = (batch.array() - bmean).square().sum();
  const double total = count + n;
  const double delta = bmean - mean;
  mean += delta * n / total;
  m2 += bm2 + delta * delta * count * n / total;
  count = total;
}

RewardNormalizer::RewardNormalizer(int num_envs, double gamma, double eps)
    : gamma_(gamma), eps_(eps), returns_(Eigen::VectorXd::Zero(num_envs)) {}

Eigen::VectorXd RewardNormalizer::normalize(const Eigen::VectorXd& rewards, const Eigen::VectorXd& dones) {
  if (rewards.size() != returns_.size() || dones.size() != returns_.size())
    throw std::invalid_argument("RewardNormalizer: size mismatch");
  returns_ = gamma_ * returns_ + rewards;
  stat_.update(returns_);
  returns_ = returns_.cwiseProduct((1.0 - dones.array()).matrix());
  return rewards / scale();
}

double RewardNormalizer::scale() const { return std::sqrt(stat_.variance() + eps_); }

void RewardNormalizer::save(BinaryWriter& w) const {
  w.f64(gamma_);
  w.f64(eps_);
  w.f64(stat_.mean);
  w.f64(stat_.m2);
  w.f64(stat_.count);
  w.u64(static_cast<std::uint64_t>(returns_.size()));
  for (Eigen::Index i = 0; i < returns_.size(); ++i) w.f64(returns_[i]);
}

void RewardNormalizer::load(BinaryReader& r) {
  gamma_ = r.f64();
  eps_ = r.f64();
  stat_.mean = r.f64();
  stat_.m2 = r.f64();
  stat_.count = r.f64();
  returns_.resize(static_cast<Eigen::Index>(r.u64()));
  for (Eigen::Index i = 0; i < returns_.size(); ++i) returns_[i] = r.f64();
}

}  // namespace qclab::ppo
