#include "qclab/harness/datagen.hpp"

#include <algorithm>
#include <vector>

#include "qclab/task/scripted.hpp"

namespace qclab::harness {

task::EnvConfig datagen_env_config(task::EnvConfig c) {
  using sim::ObstacleKind;
  c.kind_mix = {{ObstacleKind::Flat, 1.0},
                {ObstacleKind::Highland, 1.0},
                {ObstacleKind::Barrier, 1.0},
                {ObstacleKind::Tunnel, 1.0},
                {ObstacleKind::Crack, 1.0}};
  c.curriculum = false;
  c.random_difficulty = true;
  c.fixed_l.reset();
  c.start_min = {0.3, -0.4, -0.4};
  c.start_max = {1.6, 0.4, 0.4};
  c.episode_length_s = 5.0;
  return c;
}

est::CollisionDataset generate_collision_dataset(const sim::RobotModel& model, const task::EnvConfig& env_cfg,
                                                 const DatagenConfig& cfg, std::uint64_t seed) {
  task::VecEnv env(model, env_cfg, seed, cfg.envs);
  Rng rng = Rng::derive(seed, 0xDA7A);
  std::vector<task::TrotGait> gaits(static_cast<std::size_t>(cfg.envs));
  std::vector<std::uint64_t> episode(static_cast<std::size_t>(cfg.envs), 0);
  for (auto& g : gaits) g = task::TrotGait::sample(rng);

  est::CollisionDataset data;
  data.history = cfg.history;
  data.reserve(static_cast<std::size_t>(cfg.transitions));
  Eigen::MatrixXd actions(kNumJoints, cfg.envs);
  std::vector<task::StepInfo> infos;
  while (static_cast<long>(data.size()) < cfg.transitions) {
    for (int i = 0; i < cfg.envs; ++i) {
      const auto& s = env.slot(i);
      if (s.episodes != episode[i]) {
        episode[i] = s.episodes;
        gaits[i] = task::TrotGait::sample(rng);
      }
      JointVector a = gaits[i].action(s.episode_time);
      for (int j = 0; j < kNumJoints; ++j) a[j] += cfg.action_noise * rng.normal();
      actions.col(i) = a;
    }
    env.step(actions, infos);

    // keep environments that are mid-episode and past the warmup
    std::vector<int> keep;
    for (int i = 0; i < cfg.envs; ++i)
      if (!infos[i].done && env.slot(i).episode_steps >= cfg.warmup_steps) keep.push_back(i);
    if (keep.empty()) continue;
    const Eigen::MatrixXd hist = env.histories(cfg.history);
    const Eigen::MatrixXd lab = env.collision_labels();
    const long room = cfg.transitions - static_cast<long>(data.size());
    const int n = static_cast<int>(std::min<long>(room, static_cast<long>(keep.size())));
    Eigen::MatrixXd h(hist.rows(), n), l(kNumFlags, n);
    std::vector<std::uint8_t> kinds(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      h.col(k) = hist.col(keep[k]);
      l.col(k) = lab.col(keep[k]);
      kinds[k] = static_cast<std::uint8_t>(env.curriculum().kind[keep[k]]);
    }
    data.append(h, l, kinds);
  }
  data.shrink_to_fit();
  return data;
}

}  // namespace qclab::harness
