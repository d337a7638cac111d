#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qclab/harness/config.hpp"
#include "qclab/harness/policy.hpp"

namespace qclab::harness {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for k successes out of n.
WilsonInterval wilson_interval(int k, int n, double z = 1.959963984540054);
bool intervals_overlap(const WilsonInterval& a, const WilsonInterval& b);

struct EvalRow {
  sim::ObstacleKind kind = sim::ObstacleKind::Flat;
  double l = 0.0;
  int episodes = 0;
  int successes = 0;
  int falls = 0;  // fall, base contact or simulator fault
  int timeouts = 0;  // ran out of time without crossing the goal
  double success_rate = 0.0;
  WilsonInterval interval;
  double avg_displacement = 0.0;  // progress / goal distance, clamped to [0, 1]
};

// Obstacle parameters swept for one kind: `points` values from the easy to
// the hard end of the test range, a single value for Flat.
std::vector<double> eval_points(sim::ObstacleKind kind, int points);

// One fixed course per episode: start at the lane origin, constant forward
// command, episode ends at the goal line or after the time limit.
task::EnvConfig eval_env_config(const task::EnvConfig& base, const EvalConfig& eval, sim::ObstacleKind kind,
                                double l);

// Runs `episodes` parallel episodes, one per environment.
EvalRow evaluate_point(const sim::RobotModel& model, const task::EnvConfig& env, Policy& policy, int episodes,
                       std::uint64_t seed);

// Every kind in `eval.kinds` at every eval point. The seed of each point
// depends only on (seed, kind, point), so policies are compared on identical
// courses and start states.
std::vector<EvalRow> evaluate_policy(const sim::RobotModel& model, const task::EnvConfig& base,
                                     const EvalConfig& eval, Policy& policy, std::uint64_t seed);

std::string eval_csv_header();
std::string eval_csv_row(const std::string& policy, const EvalRow& row);

}  // namespace qclab::harness
