#include "qclab/harness/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace qclab::harness {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

WilsonInterval wilson_interval(int k, int n, double z) {
  if (n <= 0) return {};
  const double p = static_cast<double>(k) / n, z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

bool intervals_overlap(const WilsonInterval& a, const WilsonInterval& b) { return a.lo <= b.hi && b.lo <= a.hi; }

std::vector<double> eval_points(sim::ObstacleKind kind, int points) {
  const course::DifficultyRange r = course::test_range(kind);
  if (kind == sim::ObstacleKind::Flat || points <= 1) return {r.easy};
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(r.easy + (r.hard - r.easy) * i / (points - 1));
  return out;
}

task::EnvConfig eval_env_config(const task::EnvConfig& base, const EvalConfig& eval, sim::ObstacleKind kind,
                                double l) {
  task::EnvConfig c = base;
  c.kind_mix = {{kind, 1.0}};
  c.curriculum = false;
  c.random_difficulty = false;
  c.fixed_l = l;
  c.fixed_command = eval.command;
  c.episode_length_s = eval.episode_length_s;
  c.end_at_goal = true;
  c.start_min = {};
  c.start_max = {};
  c.randomization.enabled = eval.randomize;
  return c;
}

EvalRow evaluate_point(const sim::RobotModel& model, const task::EnvConfig& cfg, Policy& policy, int episodes,
                       std::uint64_t seed) {
  task::VecEnv env(model, cfg, seed, episodes);
  EvalRow row;
  row.kind = cfg.kind_mix.front().first;
  row.l = cfg.fixed_l.value_or(0.0);
  row.episodes = episodes;
  const double goal_distance = cfg.geometry.goal_x - cfg.start_min.x;
  std::vector<char> finished(static_cast<std::size_t>(episodes), 0);
  std::vector<task::StepInfo> infos;
  int remaining = episodes;
  double displacement = 0.0;
  policy.begin(episodes);
  // every episode ends by the time limit at the latest
  const long max_steps = static_cast<long>(std::ceil(cfg.episode_length_s / cfg.sim.control_dt())) + 2;
  for (long t = 0; t < max_steps && remaining > 0; ++t) {
    env.step(policy.act(env), infos);
    policy.after_step(infos);
    for (int i = 0; i < episodes; ++i) {
      if (finished[i] || !infos[i].done) continue;
      finished[i] = 1;
      --remaining;
      const task::EpisodeSummary& e = infos[i].episode;
      if (e.success) {
        ++row.successes;
        displacement += 1.0;
      } else {
        if (e.reason == task::Termination::Timeout || e.reason == task::Termination::Goal)
          ++row.timeouts;
        else
          ++row.falls;
        displacement += std::clamp(e.distance / goal_distance, 0.0, 1.0);
      }
    }
  }
  if (remaining != 0) throw std::logic_error("evaluate_point: episodes did not terminate");
  row.success_rate = static_cast<double>(row.successes) / episodes;
  row.interval = wilson_interval(row.successes, episodes);
  row.avg_displacement = displacement / episodes;
  return row;
}

std::vector<EvalRow> evaluate_policy(const sim::RobotModel& model, const task::EnvConfig& base,
                                     const EvalConfig& eval, Policy& policy, std::uint64_t seed) {
  std::vector<EvalRow> rows;
  for (sim::ObstacleKind kind : eval.kinds) {
    const auto points = eval_points(kind, eval.points);
    for (std::size_t p = 0; p < points.size(); ++p) {
      const std::uint64_t s = mix(seed ^ mix(static_cast<std::uint64_t>(kind) * 64 + p));
      rows.push_back(evaluate_point(model, eval_env_config(base, eval, kind, points[p]), policy, eval.episodes, s));
    }
  }
  return rows;
}

std::string eval_csv_header() {
  return "policy,kind,l,episodes,successes,falls,timeouts,success_rate,wilson_lo,wilson_hi,avg_displacement";
}

std::string eval_csv_row(const std::string& policy, const EvalRow& r) {
  return policy + "," + std::string(sim::kind_name(r.kind)) + "," + fmt(r.l) + "," + std::to_string(r.episodes) +
         "," + std::to_string(r.successes) + "," + std::to_string(r.falls) + "," + std::to_string(r.timeouts) + "," +
         fmt(r.success_rate) + "," + fmt(r.interval.lo) + "," + fmt(r.interval.hi) + "," +
         fmt(r.avg_displacement);
}

}  // namespace qclab::harness
