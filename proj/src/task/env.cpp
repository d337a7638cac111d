#include "qclab/task/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qclab::task {

namespace {

constexpr std::array<std::string_view, 6> kTerminationNames = {"none",    "fall",  "base_contact",
                                                               "timeout", "fault", "goal"};

template <typename Derived>
void write_dense(BinaryWriter& w, const Eigen::DenseBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.derived().data()[i]);
}
template <typename Derived>
void read_dense(BinaryReader& r, Eigen::DenseBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.derived().data()[i] = r.f64();
}

void write_state(BinaryWriter& w, const sim::RobotState& s) {
  write_dense(w, s.base_position);
  write_dense(w, s.base_orientation.coeffs());
  write_dense(w, s.base_linear_velocity);
  write_dense(w, s.base_angular_velocity);
  write_dense(w, s.joint_positions);
  write_dense(w, s.joint_velocities);
  write_dense(w, s.joint_torques);
  for (const auto& f : s.contact.link_forces) write_dense(w, f);
  for (const auto& f : s.contact.foot_forces) write_dense(w, f);
  for (double f : s.contact.link_force_magnitudes) w.f64(f);
  for (bool b : s.contact.flags) w.u8(b ? 1 : 0);
  w.f64(s.sim_time);
  w.u8(s.fault ? 1 : 0);
  w.i64(s.deep_penetrations);
}

void read_state(BinaryReader& r, sim::RobotState& s) {
  read_dense(r, s.base_position);
  Eigen::Vector4d q;
  read_dense(r, q);
  s.base_orientation.coeffs() = q;
  read_dense(r, s.base_linear_velocity);
  read_dense(r, s.base_angular_velocity);
  read_dense(r, s.joint_positions);
  read_dense(r, s.joint_velocities);
  read_dense(r, s.joint_torques);
  for (auto& f : s.contact.link_forces) read_dense(r, f);
  for (auto& f : s.contact.foot_forces) read_dense(r, f);
  for (double& f : s.contact.link_force_magnitudes) f = r.f64();
  for (bool& b : s.contact.flags) b = r.u8() != 0;
  s.sim_time = r.f64();
  s.fault = r.u8() != 0;
  s.deep_penetrations = r.i64();
}

}  // namespace

std::string_view termination_name(Termination t) { return kTerminationNames.at(static_cast<std::size_t>(t)); }

std::vector<sim::ObstacleKind> assign_kinds(const std::vector<std::pair<sim::ObstacleKind, double>>& mix, int n) {
  double total = 0.0;
  for (const auto& [k, w] : mix) {
    if (w < 0.0) throw std::invalid_argument("kind mix weights must be non-negative");
    total += w;
  }
  if (mix.empty() || total <= 0.0) throw std::invalid_argument("kind mix is empty");
  std::vector<sim::ObstacleKind> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) / n * total;
    double acc = 0.0;
    out[i] = mix.back().first;
    for (const auto& [k, w] : mix) {
      acc += w;
      if (u < acc) {
        out[i] = k;
        break;
      }
    }
  }
  return out;
}

double yaw_rate_command(const EnvConfig& config, double heading_cmd, double yaw) {
  return std::clamp(config.yaw_gain * wrap_angle(heading_cmd - yaw), -config.max_yaw_rate, config.max_yaw_rate);
}

VecEnv::VecEnv(sim::RobotModel model, EnvConfig config, std::uint64_t seed, int num_envs)
    : model_(std::move(model)), config_(std::move(config)) {
  if (num_envs <= 0) throw std::invalid_argument("VecEnv: need at least one environment");
  model_.validate();
  const JointVector center = 0.5 * (model_.q_min + model_.q_max);
  const JointVector half = 0.5 * (model_.q_max - model_.q_min) * config_.soft_limit_fraction;
  soft_min_ = center - half;
  soft_max_ = center + half;

  const auto kinds = assign_kinds(config_.kind_mix, num_envs);
  curriculum_.difficulty.assign(num_envs, std::clamp(config_.initial_difficulty, 0.0, 1.0));
  curriculum_.kind = kinds;
  curriculum_.command.assign(num_envs, {});
  slots_.reserve(num_envs);
  for (int i = 0; i < num_envs; ++i) {
    EnvSlot s;
    s.rng = Rng::derive(seed, static_cast<std::uint64_t>(i));
    s.history = est::ObservationHistory(config_.history_length);
    slots_.push_back(std::move(s));
  }
  reset_all();
}

void VecEnv::set_kind(int env, sim::ObstacleKind kind) { curriculum_.kind.at(env) = kind; }

void VecEnv::set_difficulty(int env, double difficulty) {
  curriculum_.difficulty.at(env) = std::clamp(difficulty, 0.0, 1.0);
}

double VecEnv::obstacle_l(int env) const {
  const auto kind = curriculum_.kind[env];
  if (kind == sim::ObstacleKind::Flat) return 0.0;
  if (config_.fixed_l) return *config_.fixed_l;
  return course::train_range(kind).at(curriculum_.difficulty[env]);
}

void VecEnv::reset_all() {
  for (int i = 0; i < size(); ++i) reset(i);
}

void VecEnv::reset(int env) {
  EnvSlot& s = slots_.at(env);
  Rng& rng = s.rng;
  if (config_.random_difficulty) curriculum_.difficulty[env] = rng.uniform();
  course::Command cmd = config_.fixed_command ? course::Command{*config_.fixed_command, 0.0} : course::sample_command(rng);
  curriculum_.command[env] = cmd;
  s.command = cmd;
  s.obstacles = course::build_obstacle(curriculum_.kind[env], obstacle_l(env), rng.next_u64(), config_.geometry);
  s.privileged = assemble_privileged(config_.randomization, rng);
  sim::StartPose start;
  start.x = rng.uniform(config_.start_min.x, config_.start_max.x);
  start.y = rng.uniform(config_.start_min.y, config_.start_max.y);
  start.yaw = rng.uniform(config_.start_min.yaw, config_.start_max.yaw);
  s.state = sim::reset_env(model_, s.obstacles, rng, config_.reset_noise, start);
  s.previous_action.setZero();
  s.previous_torque.setZero();
  s.previous_qd = s.state.joint_velocities;
  s.episode_time = 0.0;
  s.base_contact_time = 0.0;
  s.start_x = s.state.base_position.x();
  s.episode_return = 0.0;
  s.episode_steps = 0;
  s.reached_goal = false;
  ++s.episodes;
  s.history.reset();
  refresh_observation(s);
}

void VecEnv::refresh_observation(EnvSlot& s) {
  s.observation = assemble_observation(model_, s.state, s.command, s.previous_action, config_.obs_noise, &s.rng);
  s.history.push(s.observation);
}

StepInfo VecEnv::step_one(int env, const JointVector& raw_action) {
  EnvSlot& s = slots_[env];
  const JointVector action = raw_action.cwiseMax(-1.0).cwiseMin(1.0);
  const double dt = config_.sim.control_dt();
  s.state = sim::step_dynamics(model_, config_.sim, s.privileged.dynamics(), s.state, action, s.obstacles);
  s.episode_time += dt;
  ++s.episode_steps;

  StepInfo info;
  const sim::RobotState& st = s.state;
  if (!st.fault) {
    const Mat3 R = st.rotation();
    const double yaw = sim::base_yaw(st.base_orientation);
    const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
    RewardBreakdown& b = info.reward;
    b[RewardTerm::GoalVelocity] =
        reward_velocity(st.base_linear_velocity.dot(heading), yaw, s.command.velocity, s.command.heading, config_.velocity);
    b[RewardTerm::YawRate] =
        reward_yaw_rate(yaw_rate_command(config_, s.command.heading, yaw), st.base_angular_velocity.z());
    b[RewardTerm::HipPosition] = reward_pos(st.joint_positions, model_.default_joint_angles);
    b[RewardTerm::Collision] = reward_collision(st.contact.flags);
    RegularizationInputs in;
    in.base_linear_velocity_body = R.transpose() * st.base_linear_velocity;
    in.base_angular_velocity_body = R.transpose() * st.base_angular_velocity;
    in.q = st.joint_positions;
    in.q_default = model_.default_joint_angles;
    in.q_min = soft_min_;
    in.q_max = soft_max_;
    in.qd = st.joint_velocities;
    in.previous_qd = s.previous_qd;
    in.action = action;
    in.previous_action = s.previous_action;
    in.torque = st.joint_torques;
    in.previous_torque = s.previous_torque;
    in.foot_forces = st.contact.foot_forces;
    in.dt = dt;
    reward_regularization(in, b);
    total_reward(b, config_.weights);
  }
  s.episode_return += info.reward.total;

  // terminations
  Termination reason = Termination::None;
  const double x = st.base_position.x();
  if (x >= config_.geometry.goal_x) s.reached_goal = true;
  if (st.fault) {
    reason = Termination::Fault;
  } else {
    double ground = s.obstacles.terrain_height(x, st.base_position.y(), st.base_position.z());
    if (!std::isfinite(ground)) ground = 0.0;
    s.base_contact_time = st.contact.flags[0] ? s.base_contact_time + dt : 0.0;
    if (st.base_position.z() - ground < config_.fall_height) reason = Termination::Fall;
    else if (s.base_contact_time > config_.base_contact_limit_s) reason = Termination::BaseContact;
    else if (config_.end_at_goal && s.reached_goal) reason = Termination::Goal;
    else if (s.episode_time >= config_.episode_length_s - 1e-9) reason = Termination::Timeout;
  }

  s.previous_action = action;
  s.previous_torque = st.joint_torques;
  s.previous_qd = st.joint_velocities;

  if (reason != Termination::None) {
    info.done = true;
    info.timeout = reason == Termination::Timeout || reason == Termination::Goal;
    info.reason = reason;
    EpisodeSummary& e = info.episode;
    e.kind = curriculum_.kind[env];
    e.l = s.obstacles.difficulty_param;
    e.difficulty = curriculum_.difficulty[env];
    e.command = s.command.velocity;
    e.distance = st.fault ? 0.0 : x - s.start_x;
    e.time = s.episode_time;
    e.episode_return = s.episode_return;
    e.steps = s.episode_steps;
    e.reached_goal = s.reached_goal;
    e.success = s.reached_goal &&
                (reason == Termination::Timeout || reason == Termination::Goal);
    e.reason = reason;
    if (config_.curriculum && !config_.fixed_l) curriculum_.end_episode(env, e.distance, e.time);
    reset(env);
  } else {
    refresh_observation(s);
  }
  return info;
}

void VecEnv::step(const Eigen::MatrixXd& actions, std::vector<StepInfo>& infos) {
  if (actions.rows() != kNumJoints || actions.cols() != size())
    throw std::invalid_argument("VecEnv::step: actions must be 12 x num_envs");
  infos.resize(slots_.size());
  for (int i = 0; i < size(); ++i) {
    infos[i] = step_one(i, actions.col(i));
    if (log_enabled_ && infos[i].done) log_.push_back({step_counter_, i, infos[i].reason});
  }
  ++step_counter_;
}

Eigen::MatrixXd VecEnv::observations() const {
  Eigen::MatrixXd m(kObsDim, size());
  for (int i = 0; i < size(); ++i) m.col(i) = slots_[i].observation;
  return m;
}

Eigen::MatrixXd VecEnv::histories(int steps) const {
  Eigen::MatrixXd m(steps * kObsDim, size());
  for (int i = 0; i < size(); ++i)
    slots_[i].history.copy_recent(steps, {m.col(i).data(), static_cast<std::size_t>(m.rows())});
  return m;
}

Eigen::MatrixXd VecEnv::privileged() const {
  Eigen::MatrixXd m(kPrivDim, size());
  for (int i = 0; i < size(); ++i) m.col(i) = slots_[i].privileged.to_vector();
  return m;
}

sim::CollisionDomainGrid VecEnv::collision_domain(int env) const {
  const EnvSlot& s = slots_.at(env);
  return sim::sample_collision_domain(s.state, s.obstacles);
}

Eigen::MatrixXd VecEnv::collision_domains() const {
  Eigen::MatrixXd m(sim::CollisionDomainGrid::kCells, size());
  for (int i = 0; i < size(); ++i) {
    const auto g = collision_domain(i);
    for (int c = 0; c < sim::CollisionDomainGrid::kCells; ++c) m(c, i) = g.occupancy[c];
  }
  return m;
}

Vec3 VecEnv::body_velocity(int env) const {
  const auto& st = slots_.at(env).state;
  return st.rotation().transpose() * st.base_linear_velocity;
}

Eigen::MatrixXd VecEnv::body_velocities() const {
  Eigen::MatrixXd m(3, size());
  for (int i = 0; i < size(); ++i) m.col(i) = body_velocity(i);
  return m;
}

Eigen::MatrixXd VecEnv::collision_labels() const {
  Eigen::MatrixXd m(kNumFlags, size());
  for (int i = 0; i < size(); ++i)
    for (int f = 0; f < kNumFlags; ++f) m(f, i) = slots_[i].state.contact.flags[f] ? 1.0 : 0.0;
  return m;
}

void VecEnv::save(BinaryWriter& w) const {
  w.u64(slots_.size());
  w.i64(step_counter_);
  for (int i = 0; i < size(); ++i) {
    const EnvSlot& s = slots_[i];
    w.u8(static_cast<std::uint8_t>(curriculum_.kind[i]));
    w.f64(curriculum_.difficulty[i]);
    w.f64(curriculum_.command[i].velocity);
    w.f64(curriculum_.command[i].heading);
    write_state(w, s.state);
    w.u8(static_cast<std::uint8_t>(s.obstacles.kind));
    w.f64(s.obstacles.difficulty_param);
    w.u64(s.obstacles.boxes.size());
    for (const auto& b : s.obstacles.boxes) {
      write_dense(w, b.min);
      write_dense(w, b.max);
      w.u8(b.ground ? 1 : 0);
    }
    write_dense(w, s.privileged.to_vector());
    w.f64(s.command.velocity);
    w.f64(s.command.heading);
    w.u32(static_cast<std::uint32_t>(s.history.head()));
    for (const auto& f : s.history.raw_frames()) write_dense(w, f);
    write_dense(w, s.observation);
    write_dense(w, s.previous_action);
    write_dense(w, s.previous_torque);
    write_dense(w, s.previous_qd);
    w.str(s.rng.save());
    w.f64(s.episode_time);
    w.f64(s.base_contact_time);
    w.f64(s.start_x);
    w.f64(s.episode_return);
    w.i64(s.episode_steps);
    w.u8(s.reached_goal ? 1 : 0);
    w.u64(s.episodes);
  }
}

void VecEnv::load(BinaryReader& r) {
  if (r.u64() != slots_.size()) throw std::runtime_error("VecEnv::load: environment count mismatch");
  step_counter_ = r.i64();
  for (int i = 0; i < size(); ++i) {
    EnvSlot& s = slots_[i];
    curriculum_.kind[i] = static_cast<sim::ObstacleKind>(r.u8());
    curriculum_.difficulty[i] = r.f64();
    curriculum_.command[i].velocity = r.f64();
    curriculum_.command[i].heading = r.f64();
    read_state(r, s.state);
    s.obstacles.kind = static_cast<sim::ObstacleKind>(r.u8());
    s.obstacles.difficulty_param = r.f64();
    s.obstacles.boxes.resize(r.u64());
    for (auto& b : s.obstacles.boxes) {
      read_dense(r, b.min);
      read_dense(r, b.max);
      b.ground = r.u8() != 0;
    }
    PrivilegedVector pv;
    read_dense(r, pv);
    s.privileged.mass_offset = pv[0];
    s.privileged.com_offset = pv.segment<3>(1);
    s.privileged.friction = pv[4];
    s.privileged.motor_strength = pv.segment<kNumJoints>(5);
    s.command.velocity = r.f64();
    s.command.heading = r.f64();
    const int head = static_cast<int>(r.u32());
    std::vector<Observation> frames(static_cast<std::size_t>(s.history.length()));
    for (auto& f : frames) read_dense(r, f);
    s.history.restore(std::move(frames), head);
    read_dense(r, s.observation);
    read_dense(r, s.previous_action);
    read_dense(r, s.previous_torque);
    read_dense(r, s.previous_qd);
    s.rng.load(r.str());
    s.episode_time = r.f64();
    s.base_contact_time = r.f64();
    s.start_x = r.f64();
    s.episode_return = r.f64();
    s.episode_steps = static_cast<int>(r.i64());
    s.reached_goal = r.u8() != 0;
    s.episodes = r.u64();
  }
}

}  // namespace qclab::task
