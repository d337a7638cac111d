// Acceptance suite: one line per criterion, PASS or FAIL with the measured
// numbers. Thresholds below are fixed; nothing is tuned per run.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qclab/common/binary_io.hpp"
#include "qclab/course/course.hpp"
#include "qclab/distill/trainer.hpp"
#include "qclab/est/collision_trainer.hpp"
#include "qclab/harness/datagen.hpp"
#include "qclab/harness/eval.hpp"
#include "qclab/harness/pipeline.hpp"
#include "qclab/nn/gradcheck.hpp"
#include "qclab/ppo/gae.hpp"
#include "qclab/ppo/trainer.hpp"
#include "qclab/sim/collision_domain.hpp"
#include "qclab/sim/dynamics.hpp"
#include "qclab/sim/reset.hpp"
#include "qclab/task/reward.hpp"

using namespace qclab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using nn::Matrix;
using nn::Vector;

namespace {

// ---- thresholds --------------------------------------------------------------
constexpr double kGradTol = 1e-4;
constexpr int kGradInstances = 20;
constexpr double kGradSeconds = 60.0;
constexpr double kGaeTol = 1e-10;
constexpr int kGaeRollouts = 1000;
constexpr double kRewardTol = 1e-9;
constexpr int kOccupancyScenes = 100;
constexpr double kStandTol = 0.05;
constexpr double kStandSeconds = 2.0;
constexpr long kEstimatorTransitions = 300000;
constexpr long kMinTransitions = 50000;
constexpr long kMinPositives = 100;
constexpr double kBceRatio = 0.5;
constexpr double kEstimatorSeconds = 15 * 60.0;
constexpr int kPpoEnvs = 256;
constexpr int kPpoMaxIterations = 1000;
constexpr double kPpoSeconds = 60 * 60.0;
constexpr double kRvelTarget = 0.6;
constexpr int kRvelWindow = 10;  // iterations averaged for the r_vel check
constexpr double kTunnelL = 0.38;
constexpr double kSuccessGap = 0.3;
constexpr int kTunnelEnvs = 256;
constexpr int kTunnelBlock = 100;  // iterations between evaluations
constexpr int kTunnelMaxIterations = 500;
constexpr int kTunnelEpisodes = 200;
constexpr double kImitationDrop = 10.0;
constexpr double kActionErrorTol = 0.1;
constexpr int kDistillMaxIterations = 400;
constexpr double kSmokeSeconds = 10 * 60.0;

struct Context {
  fs::path work;
  std::string cli;
  std::string source_dir;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void progress(const std::string& s) {
  std::fprintf(stderr, "  .. %s\n", s.c_str());
  std::fflush(stderr);
}

Matrix random_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

// Concatenates parameter blocks into one vector and writes it back.
struct FlatParams {
  std::vector<nn::ParamRef> refs;
  Vector values, grads;

  explicit FlatParams(std::vector<nn::ParamRef> r) : refs(std::move(r)) {
    Eigen::Index n = 0;
    for (auto& p : refs) n += p.values->size();
    values.resize(n);
    grads.resize(n);
    n = 0;
    for (auto& p : refs) {
      values.segment(n, p.values->size()) = *p.values;
      grads.segment(n, p.values->size()) = *p.grads;
      n += p.values->size();
    }
  }
  void scatter() {
    Eigen::Index n = 0;
    for (auto& p : refs) {
      *p.values = values.segment(n, p.values->size());
      n += p.values->size();
    }
  }
};

// ---- 1 ------------------------------------------------------------------------

double network_grad_error(nn::Network& net, const Matrix& x, const Matrix& probe, Rng& rng) {
  net.zero_grad();
  nn::ForwardCache cache;
  net.forward(x, &cache);
  const Matrix dx = net.backward(cache, probe);
  const Vector analytic = net.grads();
  auto loss = [&] { return net.forward(x).cwiseProduct(probe).sum(); };
  double err = nn::check_gradient(loss, net.params(), analytic, 1e-5, 200, &rng).relative_error;
  Vector flat = Eigen::Map<const Vector>(x.data(), x.size());
  const Vector ax = Eigen::Map<const Vector>(dx.data(), dx.size());
  auto loss_x = [&] {
    return net.forward(Eigen::Map<Matrix>(flat.data(), x.rows(), x.cols())).cwiseProduct(probe).sum();
  };
  return std::max(err, nn::check_gradient(loss_x, flat, ax, 1e-5, 200, &rng).relative_error);
}

Outcome criterion_1(const Context&) {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::map<std::string, double> worst;
  const nn::Activation acts[] = {nn::Activation::Elu, nn::Activation::Tanh, nn::Activation::Sigmoid,
                                 nn::Activation::None};
  for (int i = 0; i < kGradInstances; ++i) {
    nn::Network dense({nn::dense(9, 16, acts[i % 4]), nn::dense(16, 8, acts[(i + 1) % 4]),
                       nn::dense(8, 5, acts[(i + 2) % 4])});
    dense.init_orthogonal(rng);
    worst["dense"] = std::max(worst["dense"], network_grad_error(dense, random_matrix(9, 3, rng),
                                                                 random_matrix(5, 3, rng), rng));

    nn::Network conv({nn::conv_time(45, 8, 1 + i % 3, 10, nn::Activation::Elu),
                      nn::conv_time(8, 6, 3, 10 - i % 3, nn::Activation::Tanh)});
    conv.init_orthogonal(rng);
    worst["conv"] = std::max(worst["conv"], network_grad_error(conv, random_matrix(450, 2, rng),
                                                               random_matrix(conv.output_size(), 2, rng), rng));

    nn::GruCell gru(6, 7);
    gru.init_orthogonal(rng);
    for (Eigen::Index k = 0; k < gru.params().size(); ++k) gru.params()[k] += 0.2 * rng.normal();
    std::vector<Matrix> xs;
    for (int t = 0; t < 6; ++t) xs.push_back(random_matrix(6, 2, rng));
    const Matrix h0 = random_matrix(7, 2, rng), probe = random_matrix(7, 2, rng);
    auto run = [&] {
      Matrix h = h0;
      for (const auto& x : xs) h = gru.step(x, h);
      return h.cwiseProduct(probe).sum();
    };
    gru.zero_grad();
    std::vector<nn::GruStepCache> caches(xs.size());
    Matrix h = h0;
    for (std::size_t t = 0; t < xs.size(); ++t) h = gru.step(xs[t], h, &caches[t]);
    Matrix dh = probe, dx0;
    for (int t = static_cast<int>(xs.size()) - 1; t >= 0; --t) {
      Matrix dx, dprev;
      gru.backward(caches[t], dh, &dx, &dprev);
      if (t == 0) dx0 = dx;
      dh = dprev;
    }
    const Vector ag = gru.grads();
    double e = nn::check_gradient(run, gru.params(), ag, 1e-5, 200, &rng).relative_error;
    Vector flat = Eigen::Map<const Vector>(xs[0].data(), xs[0].size());
    const Vector ax = Eigen::Map<const Vector>(dx0.data(), dx0.size());
    auto run_x = [&] {
      xs[0] = Eigen::Map<Matrix>(flat.data(), 6, 2);
      return run();
    };
    e = std::max(e, nn::check_gradient(run_x, flat, ax, 1e-5, 0, &rng).relative_error);
    worst["gru"] = std::max(worst["gru"], e);
  }

  // teacher stack: encoders -> actor and critic, production sizes
  ppo::TeacherModel teacher;
  for (int i = 0; i < kGradInstances; ++i) {
    teacher.init(rng);
    teacher.actor.weight(teacher.actor.layers().size() - 1) *= 100.0;
    const int B = 2;
    ppo::TeacherInputs in;
    in.obs = random_matrix(kObsDim, B, rng);
    in.c_hat = random_matrix(kNumFlags, B, rng).cwiseAbs();
    in.v_hat = random_matrix(3, B, rng);
    in.privileged = random_matrix(17, B, rng);
    in.domain = Matrix::NullaryExpr(sim::CollisionDomainGrid::kCells, B, [&] { return rng.uniform() < 0.3 ? 1.0 : 0.0; });
    const Matrix pm = random_matrix(kNumJoints, B, rng), pe = random_matrix(32, B, rng);
    const Eigen::RowVectorXd pv = random_matrix(1, B, rng);
    teacher.zero_policy_grads();
    const ppo::TeacherPass pass = teacher.forward(in, true);
    teacher.backward(pass, pm, pv, &pe);
    auto refs = teacher.policy_params();
    refs.pop_back();  // log_std does not enter these outputs
    FlatParams fp(refs);
    auto loss = [&] {
      fp.scatter();
      const ppo::TeacherPass p = teacher.forward(in, false);
      const Matrix frozen = ppo::assemble_policy_input(in.obs, in.c_hat, in.v_hat, pass.p, pass.e);
      return p.mean.cwiseProduct(pm).sum() + teacher.critic.forward(frozen).cwiseProduct(pv).sum() +
             p.e.cwiseProduct(pe).sum();
    };
    const double e = nn::check_gradient(loss, fp.values, fp.grads, 1e-5, 40, &rng).relative_error;
    fp.scatter();
    worst["teacher"] = std::max(worst["teacher"], e);
  }

  // student stack: imagination GRU unrolled over 10 steps into the actor
  for (int i = 0; i < kGradInstances; ++i) {
    teacher.init(rng);
    teacher.actor.weight(teacher.actor.layers().size() - 1) *= 100.0;
    distill::StudentModel s = distill::StudentModel::from_teacher(teacher, std::nullopt, rng);
    distill::DistillRollout r;
    r.horizon = 10;
    r.h0 = random_matrix(distill::kImaginationHidden, 2, rng) * 0.5;
    for (int t = 0; t < r.horizon; ++t) {
      distill::StudentInputs in;
      in.obs = random_matrix(kObsDim, 2, rng);
      in.c_hat = random_matrix(kNumFlags, 2, rng).cwiseAbs();
      in.v_hat = random_matrix(3, 2, rng);
      in.e_hat = random_matrix(32, 2, rng);
      r.inputs.push_back(in);
      r.teacher_mean.push_back(random_matrix(kNumJoints, 2, rng));
      r.latent_target.push_back(random_matrix(distill::kImaginationHidden, 2, rng));
      Eigen::RowVectorXd d = Eigen::RowVectorXd::Zero(2);
      if (t == 4) d[i % 2] = 1.0;
      r.dones.push_back(d);
    }
    s.actor.zero_grad();
    s.imagination.zero_grad();
    distill::distill_loss_and_grad(s, r, 0.5, true);
    auto refs = s.imagination.params();
    refs.push_back({&s.actor.params(), &s.actor.grads()});
    FlatParams fp(refs);
    auto loss = [&] {
      fp.scatter();
      const auto l = distill::distill_loss_and_grad(s, r, 0.5, false);
      return l.imitation + 0.5 * l.latent;
    };
    const double e = nn::check_gradient(loss, fp.values, fp.grads, 1e-5, 40, &rng).relative_error;
    fp.scatter();
    worst["student"] = std::max(worst["student"], e);
  }

  const double secs = seconds_since(t0);
  bool ok = secs < kGradSeconds;
  std::string detail;
  for (const auto& [k, v] : worst) {
    ok = ok && v < kGradTol;
    detail += fmt("%s %.2e, ", k.c_str(), v);
  }
  return {ok, fmt("worst relative error over %d instances each: %sruntime %.1f s (limit %.0f s)", kGradInstances,
                  detail.c_str(), secs, kGradSeconds)};
}

// ---- 2 ------------------------------------------------------------------------

Outcome criterion_2(const Context&) {
  Rng rng(202);
  double worst = 0.0;
  const double gamma = 0.99, lambda = 0.95;
  for (int k = 0; k < kGaeRollouts; ++k) {
    const int T = 1 + static_cast<int>(rng.uniform() * 10), N = 1 + static_cast<int>(rng.uniform() * 4);
    Matrix r(T, N), v(T, N), d(T, N);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      r.data()[i] = rng.normal();
      v.data()[i] = rng.normal();
      d.data()[i] = rng.uniform() < 0.2 ? 1.0 : 0.0;
    }
    Eigen::RowVectorXd boot(N);
    for (int i = 0; i < N; ++i) boot[i] = rng.normal();
    const ppo::GaeResult g = ppo::compute_gae(r, v, d, boot, gamma, lambda);
    // A_t = sum_k (gamma lambda)^(k-t) [prod_{t<=j<k} (1 - d_j)] delta_k
    for (int i = 0; i < N; ++i) {
      for (int t = 0; t < T; ++t) {
        double sum = 0.0;
        for (int kk = t; kk < T; ++kk) {
          double alive = 1.0;
          for (int j = t; j < kk; ++j) alive *= 1.0 - d(j, i);
          const double next = kk + 1 < T ? v(kk + 1, i) : boot[i];
          const double delta = r(kk, i) + gamma * (1.0 - d(kk, i)) * next - v(kk, i);
          sum += std::pow(gamma * lambda, kk - t) * alive * delta;
        }
        worst = std::max(worst, std::abs(sum - g.advantages(t, i)));
        worst = std::max(worst, std::abs(sum + v(t, i) - g.returns(t, i)));
      }
    }
  }
  return {worst <= kGaeTol,
          fmt("max |GAE - oracle| over %d rollouts (T <= 10): %.3e (tol %.0e)", kGaeRollouts, worst, kGaeTol)};
}

// ---- 3 ------------------------------------------------------------------------

Outcome criterion_3(const Context&) {
  using task::RewardTerm;
  struct Fixture {
    std::string name;
    double got, want;
  };
  std::vector<Fixture> fx;
  const double pi = std::acos(-1.0);
  fx.push_back({"r_vel saturated", task::reward_velocity(0.5, 0.0, 0.5, 0.0), 1.0});
  fx.push_back({"r_vel backward", task::reward_velocity(-0.3, 0.0, 0.5, 0.0), -1.8});
  fx.push_back({"r_vel heading", task::reward_velocity(0.8, 0.0, 0.5, pi / 3), 0.8});
  fx.push_back({"r_vel partial", task::reward_velocity(0.25, 0.0, 0.5, 0.0), 0.5});
  fx.push_back({"r_yaw", task::reward_yaw_rate(0.5, 0.3), 0.44932896411722156});
  fx.push_back({"r_yaw exact", task::reward_yaw_rate(0.3, 0.3), 1.0});
  const auto model = sim::RobotModel::go2();
  JointVector q = model.default_joint_angles;
  q[0] = 0.1, q[3] = -0.1, q[6] = 0.1, q[9] = -0.1;
  fx.push_back({"r_pos sides", task::reward_pos(q, model.default_joint_angles), 0.02});
  q = model.default_joint_angles;
  for (int leg = 0; leg < 4; ++leg) q[leg * 3] = 0.2;
  fx.push_back({"r_pos spread", task::reward_pos(q, model.default_joint_angles), 0.16});
  FlagArray flags{};
  flags[0] = flags[link_index(0, LinkPart::Thigh)] = flags[link_index(2, LinkPart::Calf)] = true;
  fx.push_back({"r_collision", task::reward_collision(flags), 3.0});

  task::RegularizationInputs in;
  in.base_linear_velocity_body = Vec3(0.4, -0.2, 0.3);
  in.base_angular_velocity_body = Vec3(0.2, -0.1, 5.0);
  in.qd[1] = 0.1;
  in.action[4] = 0.3, in.previous_action[4] = 0.2, in.action[0] = 0.3;
  in.torque[2] = 3.0, in.previous_torque[2] = 1.0, in.torque[5] = -4.0, in.previous_torque[5] = -4.0;
  in.q[7] = 0.1, in.q[8] = -0.1;
  in.q_min = JointVector::Constant(-1.0), in.q_max = JointVector::Constant(1.0);
  in.q[10] = 1.05, in.q[11] = -1.2;
  in.foot_forces[1] = Vec3(5.0, 0.0, 1.0);
  in.foot_forces[2] = Vec3(3.0, 0.0, 1.0);
  task::RewardBreakdown b;
  task::reward_regularization(in, b);
  // hand values: squared norms / sums over the inputs above
  fx.push_back({"z velocity", b[RewardTerm::ZVelocity], 0.09});
  fx.push_back({"xy angular velocity", b[RewardTerm::XYAngularVelocity], 0.05});
  fx.push_back({"dof acceleration", b[RewardTerm::DofAcceleration], 25.0});
  fx.push_back({"action rate", b[RewardTerm::ActionRate], 0.31622776601683794});
  fx.push_back({"delta torques", b[RewardTerm::DeltaTorques], 4.0});
  fx.push_back({"torques", b[RewardTerm::Torques], 25.0});
  fx.push_back({"dof error", b[RewardTerm::DofError], 0.02 + 1.05 * 1.05 + 1.2 * 1.2});
  fx.push_back({"feet stumble", b[RewardTerm::FeetStumble], 1.0});
  fx.push_back({"dof position limits", b[RewardTerm::DofPositionLimits], 0.25});

  task::RewardBreakdown total;
  total[RewardTerm::GoalVelocity] = 1.0;
  total[RewardTerm::Collision] = 2.0;
  total[RewardTerm::Torques] = 25.0;
  fx.push_back({"weighted total", task::total_reward(total, task::RewardWeights{}), 1.5 - 20.0 - 25.0e-5});

  double worst = 0.0;
  std::string bad;
  for (const auto& f : fx) {
    const double e = std::abs(f.got - f.want);
    worst = std::max(worst, e);
    if (!(e <= kRewardTol)) bad += fmt(" [%s: got %.12g want %.12g]", f.name.c_str(), f.got, f.want);
  }
  return {bad.empty(), fmt("%zu fixtures, max error %.2e (tol %.0e)%s", fx.size(), worst, kRewardTol, bad.c_str())};
}

// ---- 4 ------------------------------------------------------------------------

Outcome criterion_4(const Context&) {
  Rng rng(404);
  const auto model = sim::RobotModel::go2();
  const sim::ObstacleKind kinds[] = {sim::ObstacleKind::Highland, sim::ObstacleKind::Barrier,
                                     sim::ObstacleKind::Tunnel, sim::ObstacleKind::Crack};
  int mismatched = 0, occupied = 0;
  for (int scene = 0; scene < kOccupancyScenes; ++scene) {
    const sim::ObstacleKind kind = kinds[scene % 4];
    const auto obs = course::build_obstacle(kind, course::train_range(kind).at(rng.uniform()), rng.next_u64());
    sim::RobotState s;
    s.base_position = Vec3(rng.uniform(1.0, 4.0), rng.uniform(-1.0, 1.0), rng.uniform(0.1, 0.5));
    s.base_orientation = Quat(Eigen::AngleAxisd(rng.uniform(-3.2, 3.2), Vec3::UnitZ()) *
                              Eigen::AngleAxisd(rng.uniform(-0.3, 0.3), Vec3::UnitX()));
    for (int j = 0; j < kNumJoints; ++j) s.joint_positions[j] = rng.uniform(model.q_min[j], model.q_max[j]);
    const auto grid = sim::sample_collision_domain(s, obs);
    // independent point-in-box test of every cell center in the yaw frame
    const Vec3 heading = s.base_orientation * Vec3::UnitX();
    const double yaw = std::atan2(heading.y(), heading.x()), c = std::cos(yaw), sn = std::sin(yaw);
    for (int iz = 0; iz < 6; ++iz)
      for (int iy = 0; iy < 8; ++iy)
        for (int ix = 0; ix < 12; ++ix) {
          const double lx = -0.45 + 0.075 * (ix + 0.5), ly = -0.20 + 0.05 * (iy + 0.5),
                       lz = -0.25 + (0.5 / 6) * (iz + 0.5);
          const Vec3 p = s.base_position + Vec3(c * lx - sn * ly, sn * lx + c * ly, lz);
          bool inside = false;
          for (const sim::Box& box : obs.boxes)
            if (!box.ground)
              inside = inside || ((p.array() >= box.min.array()).all() && (p.array() <= box.max.array()).all());
          occupied += inside;
          mismatched += (grid.occupancy[(iz * 8 + iy) * 12 + ix] != 0) != inside;
        }
  }
  return {mismatched == 0, fmt("%d scenes x 576 cells, %d occupied by the oracle, %d mismatches", kOccupancyScenes,
                               occupied, mismatched)};
}

// ---- 5 ------------------------------------------------------------------------

Outcome criterion_5(const Context&) {
  const auto model = sim::RobotModel::go2();
  const sim::SimConfig cfg;
  const auto ground = course::build_obstacle(sim::ObstacleKind::Flat, 0.0, 0);
  sim::RobotState s = sim::reset_env(model, ground, 0, sim::ResetNoise{0.0, 0.0});
  const int steps = static_cast<int>(std::lround(kStandSeconds / cfg.control_dt()));
  for (int i = 0; i < steps; ++i) s = sim::step_dynamics(model, cfg, {}, s, JointVector::Zero(), ground);
  double vertical = 0.0;
  for (const Vec3& f : s.contact.foot_forces) vertical += f.z();
  const double weight = model.base_mass * 9.81;
  const double rel = std::abs(vertical - weight) / weight;
  return {rel <= kStandTol && !s.fault,
          fmt("sum Fz %.3f N vs m g %.3f N after %.1f s: %.2f%% (limit %.0f%%)", vertical, weight, s.sim_time,
              100 * rel, 100 * kStandTol)};
}

// ---- 6 / 7 --------------------------------------------------------------------

est::CollisionDataset estimator_dataset() {
  harness::DatagenConfig dc;
  dc.transitions = kEstimatorTransitions;
  return harness::generate_collision_dataset(sim::RobotModel::go2(), harness::datagen_env_config(task::EnvConfig{}),
                                             dc, 606);
}

est::CollisionTrainConfig estimator_config() {
  est::CollisionTrainConfig c;
  c.seed = 606;
  return c;
}

Outcome criterion_6(const Context& ctx) {
  const auto t0 = Clock::now();
  const est::CollisionDataset data = estimator_dataset();
  progress(fmt("dataset %zu transitions in %.1f s", data.size(), seconds_since(t0)));
  const est::CollisionTrainResult r = est::train_collision_estimator(data, estimator_config());
  const double secs = seconds_since(t0);
  const auto& m = r.final_metrics;
  bool ok = static_cast<long>(data.size()) >= kMinTransitions && secs <= kEstimatorSeconds &&
            m.heldout_bce <= kBceRatio * m.baseline_bce;
  int links = 0;
  double min_auroc = 1.0;
  for (int f = 0; f < kNumFlags; ++f) {
    if (m.positives[f] < kMinPositives) continue;
    ++links;
    min_auroc = std::min(min_auroc, m.auroc[f]);
    ok = ok && m.auroc[f] > 0.5;
  }
  ok = ok && links > 0;
  nn::Checkpoint ckpt;
  ckpt.put_network("estimator/collision", r.net);
  fs::create_directories(ctx.work);
  ckpt.save((ctx.work / "estimator.ckpt").string());
  return {ok, fmt("%zu transitions; held-out BCE %.4f vs baseline %.4f (ratio %.3f, limit %.2f); "
                  "min AUROC %.3f over %d links with >= %ld positives; %.0f s (limit %.0f s)",
                  data.size(), m.heldout_bce, m.baseline_bce, m.heldout_bce / m.baseline_bce, kBceRatio, min_auroc,
                  links, kMinPositives, secs, kEstimatorSeconds)};
}

// Mean held-out AUROC over hip links with enough positives; NaN when none.
double hip_auroc(const est::CollisionMetrics& m, int* links) {
  double sum = 0.0;
  *links = 0;
  for (int leg = 0; leg < kNumLegs; ++leg) {
    const int f = link_index(leg, LinkPart::Hip);
    if (m.positives[f] < kMinPositives) continue;
    sum += m.auroc[f];
    ++*links;
  }
  return *links > 0 ? sum / *links : std::nan("");
}

Outcome criterion_7(const Context&) {
  const est::CollisionDataset data = estimator_dataset();
  const auto r10 = est::train_collision_estimator(data, estimator_config());
  progress("k = 10 trained");
  const auto r1 = est::train_collision_estimator(data.with_history(1), estimator_config());
  int n10 = 0, n1 = 0;
  const double a10 = hip_auroc(r10.final_metrics, &n10), a1 = hip_auroc(r1.final_metrics, &n1);
  return {n10 > 0 && n10 == n1 && a10 >= a1,
          fmt("mean hip AUROC over %d hip links: k=10 %.4f, k=1 %.4f", n10, a10, a1)};
}

// ---- 8 ------------------------------------------------------------------------

Outcome criterion_8(const Context& ctx) {
  const auto t0 = Clock::now();
  ppo::TeacherTrainConfig tc;
  tc.envs = kPpoEnvs;
  task::EnvConfig env;
  env.kind_mix = {{sim::ObstacleKind::Flat, 1.0}};
  ppo::TeacherTrainer trainer(sim::RobotModel::go2(), env, tc, 1, std::nullopt);
  std::deque<double> window;
  double best = 0.0, mean = 0.0;
  bool reached = false;
  while (trainer.iteration() < kPpoMaxIterations && seconds_since(t0) < kPpoSeconds) {
    const auto m = trainer.iterate();
    window.push_back(m.terms[static_cast<int>(task::RewardTerm::GoalVelocity)]);
    if (static_cast<int>(window.size()) > kRvelWindow) window.pop_front();
    mean = std::accumulate(window.begin(), window.end(), 0.0) / window.size();
    if (static_cast<int>(window.size()) == kRvelWindow) best = std::max(best, mean);
    if (m.iteration % 25 == 0) progress(fmt("iteration %d r_vel(%d-it mean) %.3f %.0f s", m.iteration, kRvelWindow,
                                            mean, seconds_since(t0)));
    if (static_cast<int>(window.size()) == kRvelWindow && mean >= kRvelTarget) {
      reached = true;
      break;
    }
  }
  const double secs = seconds_since(t0);
  nn::Checkpoint ckpt;
  trainer.model().save(ckpt);
  fs::create_directories(ctx.work);
  ckpt.save((ctx.work / "flat_teacher.ckpt").string());
  return {reached && secs <= kPpoSeconds,
          fmt("%d envs: %d-iteration mean r_vel %.3f at iteration %d (best %.3f, target %.2f), %.0f s (limit %.0f s)",
              kPpoEnvs, kRvelWindow, mean, trainer.iteration(), best, kRvelTarget, secs, kPpoSeconds)};
}

// ---- 9 ------------------------------------------------------------------------

Outcome criterion_9(const Context& ctx) {
  const fs::path est_path = ctx.work / "estimator.ckpt";
  if (!fs::exists(est_path)) return {false, "missing " + est_path.string() + " (criterion 6 produces it)"};
  const nn::Network estimator = nn::Checkpoint::load(est_path.string()).get_network("estimator/collision");

  task::EnvConfig env;
  env.kind_mix = {{sim::ObstacleKind::Tunnel, 1.0}};
  ppo::TeacherTrainConfig full_cfg;
  full_cfg.envs = kTunnelEnvs;
  ppo::TeacherTrainConfig ablation_cfg = full_cfg;
  ablation_cfg.use_collision_estimate = false;
  const auto model = sim::RobotModel::go2();
  ppo::TeacherTrainer full(model, env, full_cfg, 9, estimator);
  ppo::TeacherTrainer ablation(model, env, ablation_cfg, 9, std::nullopt);

  harness::EvalConfig ec;
  ec.kinds = {sim::ObstacleKind::Tunnel};
  const task::EnvConfig eval_env = harness::eval_env_config(task::EnvConfig{}, ec, sim::ObstacleKind::Tunnel, kTunnelL);
  const std::uint64_t eval_seed = 0x7E57;
  auto evaluate = [&](harness::Policy& p) {
    return harness::evaluate_point(model, eval_env, p, kTunnelEpisodes, eval_seed);
  };
  harness::TeacherPolicy untrained_policy(full.model(), std::nullopt, false);
  const harness::EvalRow untrained = evaluate(untrained_policy);

  Outcome out;
  while (full.iteration() < kTunnelMaxIterations) {
    for (int i = 0; i < kTunnelBlock; ++i) {
      full.iterate();
      ablation.iterate();
    }
    harness::TeacherPolicy full_policy(full.model(), estimator, true);
    harness::TeacherPolicy ablation_policy(ablation.model(), std::nullopt, false);
    const harness::EvalRow a = evaluate(full_policy), b = evaluate(ablation_policy);
    const bool gap = a.success_rate - untrained.success_rate >= kSuccessGap;
    const bool order = a.success_rate >= b.success_rate || harness::intervals_overlap(a.interval, b.interval);
    out.pass = gap && order;
    out.detail = fmt("Tunnel l=%.2f, %d episodes, %d iterations each: full %.3f [%.3f, %.3f], no-collision %.3f "
                     "[%.3f, %.3f], untrained %.3f; gap %.3f (need %.2f)",
                     kTunnelL, kTunnelEpisodes, full.iteration(), a.success_rate, a.interval.lo, a.interval.hi,
                     b.success_rate, b.interval.lo, b.interval.hi, untrained.success_rate,
                     a.success_rate - untrained.success_rate, kSuccessGap);
    progress(out.detail);
    if (out.pass) break;
  }
  return out;
}

// ---- 10 -----------------------------------------------------------------------

Outcome criterion_10(const Context& ctx) {
  const fs::path teacher_path = ctx.work / "flat_teacher.ckpt";
  if (!fs::exists(teacher_path)) return {false, "missing " + teacher_path.string() + " (criterion 8 produces it)"};
  const std::string before = read_file(teacher_path.string());
  const ppo::TeacherModel teacher = ppo::TeacherModel::load(nn::Checkpoint::load(teacher_path.string()));

  task::EnvConfig env;
  env.kind_mix = {{sim::ObstacleKind::Flat, 1.0}};
  distill::DistillConfig dc;
  Rng rng(1010);
  distill::DistillTrainer trainer(sim::RobotModel::go2(), env, dc, teacher,
                                  distill::StudentModel::from_teacher(teacher, std::nullopt, rng), 10);
  double initial = 0.0, recent = 0.0, error = std::nan("");
  std::deque<double> window;
  bool done = false;
  while (trainer.iteration() < kDistillMaxIterations && !done) {
    const auto m = trainer.iterate();
    if (m.iteration == 1) initial = m.imitation_loss;
    window.push_back(m.imitation_loss);
    if (window.size() > 10) window.pop_front();
    recent = std::accumulate(window.begin(), window.end(), 0.0) / window.size();
    if (m.iteration % 25 == 0) {
      progress(fmt("iteration %d imitation %.5f (initial %.5f)", m.iteration, recent, initial));
      if (window.size() == 10 && recent * kImitationDrop <= initial) {
        error = distill::student_action_error(sim::RobotModel::go2(), env, teacher, trainer.student(), 0xA11CE, 64,
                                              100);
        progress(fmt("held-out action error %.4f", error));
        done = error < kActionErrorTol;
      }
    }
  }
  if (std::isnan(error))
    error = distill::student_action_error(sim::RobotModel::go2(), env, teacher, trainer.student(), 0xA11CE, 64, 100);
  nn::Checkpoint after;
  trainer.teacher().save(after);
  nn::Checkpoint orig = nn::Checkpoint::load(teacher_path.string());
  const bool frozen = read_file(teacher_path.string()) == before && after.serialize() == orig.serialize();
  const bool drop = recent * kImitationDrop <= initial;
  return {drop && error < kActionErrorTol && frozen,
          fmt("imitation loss %.5f -> %.5f (x%.1f, need x%.0f) in %d iterations; held-out mean |a_T - a_S| %.4f "
              "(limit %.2f); teacher bit-identical: %s",
              initial, recent, initial / recent, kImitationDrop, trainer.iteration(), error, kActionErrorTol,
              frozen ? "yes" : "no")};
}

// ---- 11 -----------------------------------------------------------------------

Outcome criterion_11(const Context& ctx) {
  using harness::Stage;
  namespace art = harness::artifact;
  const fs::path base = ctx.work / "determinism";
  fs::remove_all(base);
  auto make = [&](const std::string& name) {
    harness::ExperimentConfig c = harness::ExperimentConfig::parse(
        "envs = 8\n"
        "env.kinds = flat:1, tunnel:1, crack:1\n"
        "datagen.transitions = 5000\n"
        "datagen.envs = 32\n"
        "estimator.steps = 40\n"
        "estimator.eval_every = 10\n"
        "teacher.iterations = 8\n"
        "teacher.checkpoint_every = 2\n"
        "distill.iterations = 6\n"
        "distill.action_error_envs = 8\n"
        "distill.action_error_steps = 10\n");
    c.set("out_dir", (base / name).string());
    return c;
  };
  const harness::StageOptions quiet{true};
  const Stage stages[] = {Stage::GenDataset, Stage::TrainEstimator, Stage::TrainTeacher, Stage::Distill};
  std::vector<std::string> failures;
  for (const char* run : {"a", "b"})
    for (Stage s : stages)
      if (harness::run_stage_status(s, make(run), quiet) != 0)
        failures.push_back(std::string("stage ") + std::string(harness::stage_name(s)) + " failed");

  auto same = [&](const std::string& x, const std::string& y, const char* what) {
    const bool ok = fs::exists(x) && fs::exists(y) && read_file(x) == read_file(y);
    if (!ok) failures.push_back(std::string(what) + " differs");
    return ok;
  };
  const fs::path a = base / "a", b = base / "b";
  int compared = 0;
  for (const char* f : {art::kDataset, art::kEstimatorMetrics, art::kEstimator, art::kTeacherMetrics, art::kTeacher,
                        art::kTeacherState, art::kDistillMetrics, art::kStudent, art::kDistillState}) {
    same((a / f).string(), (b / f).string(), f);
    ++compared;
  }

  // checkpoint round trip and cross-stage forward equality
  const nn::Checkpoint tck = nn::Checkpoint::load((a / art::kTeacher).string());
  if (tck.serialize() != read_file((a / art::kTeacher).string())) failures.push_back("teacher round trip");
  const nn::Checkpoint sck = nn::Checkpoint::load((a / art::kStudent).string());
  if (sck.serialize() != read_file((a / art::kStudent).string())) failures.push_back("student round trip");
  {
    const ppo::TeacherModel t = ppo::TeacherModel::load(tck);
    nn::Checkpoint again;
    t.save(again);
    again.put_network("estimator/collision", tck.get_network("estimator/collision"));
    again.config_hash = tck.config_hash;
    if (again.serialize() != tck.serialize()) failures.push_back("teacher reload re-serialization");
    Rng rng(1);
    const distill::StudentModel s = distill::StudentModel::from_teacher(t, std::nullopt, rng);
    const Matrix x = random_matrix(t.actor.input_size(), 5, rng);
    if (s.actor.forward(x) != t.actor.forward(x)) failures.push_back("teacher actor forward after cross-stage load");
  }

  // kill and resume: stop after the iteration-4 checkpoint with stale rows
  // 5 and a partial row 6 in the metrics file, then continue to 8
  harness::ExperimentConfig c = make("resume");
  fs::create_directories(base / "resume");
  for (const char* f : {art::kDataset, art::kEstimator}) fs::copy_file(a / f, base / "resume" / f);
  c.set("teacher.iterations", "4");
  harness::run_stage_status(Stage::TrainTeacher, c, quiet);
  {
    const std::string csv = (base / "resume" / art::kTeacherMetrics).string();
    write_file_atomic(csv, read_file(csv) + "5,0.25,0\n6,0.1");
  }
  c.set("teacher.iterations", "8");
  harness::run_stage_status(Stage::TrainTeacher, c, quiet);
  same((a / art::kTeacherMetrics).string(), (base / "resume" / art::kTeacherMetrics).string(),
       "resumed teacher metrics");
  same((a / art::kTeacher).string(), (base / "resume" / art::kTeacher).string(), "resumed teacher checkpoint");

  c.set("distill.iterations", "3");
  harness::run_stage_status(Stage::Distill, c, quiet);
  c.set("distill.iterations", "6");
  harness::run_stage_status(Stage::Distill, c, quiet);
  same((a / art::kDistillMetrics).string(), (base / "resume" / art::kDistillMetrics).string(),
       "resumed distill metrics");
  same((a / art::kStudent).string(), (base / "resume" / art::kStudent).string(), "resumed student checkpoint");

  std::string detail = fmt("%d artifacts compared across two runs, round trips, teacher and distill resume", compared);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// ---- 12 -----------------------------------------------------------------------

Outcome criterion_12(const Context& ctx) {
  namespace art = harness::artifact;
  if (ctx.cli.empty()) return {false, "no --cli binary given"};
  const fs::path out = ctx.work / "smoke";
  fs::remove_all(out);
  const std::string cfg = ctx.source_dir + "/configs/toy.cfg";
  const harness::ExperimentConfig parsed = harness::ExperimentConfig::load(cfg);
  const auto t0 = Clock::now();
  std::string failed;
  for (const char* stage : {"gen-dataset", "train-estimator", "train-teacher", "distill", "eval", "dump-latents"}) {
    const std::string cmd =
        "\"" + ctx.cli + "\" " + stage + " --config \"" + cfg + "\" --out \"" + out.string() + "\" --quiet";
    const int rc = std::system(cmd.c_str());
    progress(fmt("%s exit %d at %.0f s", stage, rc, seconds_since(t0)));
    if (rc != 0) failed += std::string(" ") + stage;
  }
  const double secs = seconds_since(t0);
  std::string missing;
  for (const char* f : {art::kDataset, art::kEstimator, art::kEstimatorMetrics, art::kTeacher, art::kTeacherState,
                        art::kTeacherMetrics, art::kStudent, art::kDistillState, art::kDistillMetrics, art::kEval,
                        art::kLatents, art::kManifest})
    if (!fs::exists(out / f) || fs::file_size(out / f) == 0) missing += std::string(" ") + f;
  const bool toy = parsed.envs == 16 && parsed.teacher_iterations == 50 && parsed.distill_iterations == 50 &&
                   parsed.estimator.steps == 50;
  return {failed.empty() && missing.empty() && toy && secs < kSmokeSeconds,
          fmt("%d envs, %d iterations per stage, six stages through the CLI in %.0f s (limit %.0f s)%s%s",
              parsed.envs, parsed.teacher_iterations, secs, kSmokeSeconds,
              failed.empty() ? "" : ("; failed:" + failed).c_str(),
              missing.empty() ? "" : ("; missing:" + missing).c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qclab acceptance suite"};
  std::vector<int> only;
  Context ctx;
  std::string work = "acceptance_work";
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--work", work, "directory for artifacts shared between criteria");
  app.add_option("--cli", ctx.cli, "path to the qclab executable (criterion 12)");
  ctx.source_dir = QCLAB_SOURCE_DIR;
  CLI11_PARSE(app, argc, argv);
  ctx.work = work;
  fs::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"finite-difference gradients", criterion_1},
      {"GAE oracle", criterion_2},
      {"reward fixtures", criterion_3},
      {"occupancy oracle", criterion_4},
      {"standing contact statics", criterion_5},
      {"collision estimator quality", criterion_6},
      {"history ablation", criterion_7},
      {"teacher learnability on Flat", criterion_8},
      {"Tunnel ordering", criterion_9},
      {"distillation", criterion_10},
      {"determinism and persistence", criterion_11},
      {"end-to-end smoke", criterion_12},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %-30s %s  %s  [%.1f s]\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
