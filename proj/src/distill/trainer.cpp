#include "qclab/distill/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "qclab/est/heads.hpp"

namespace qclab::distill {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Teacher targets and frozen student inputs for the current env state.
struct Labels {
  StudentInputs in;
  Matrix teacher_mean, latent;
};

Labels label_state(const task::VecEnv& env, const ppo::TeacherModel& teacher, const StudentModel& student) {
  Labels l;
  l.in.obs = env.observations();
  l.in.c_hat = student.collision_estimate(env.histories(est::kCollisionHistory));
  l.in.v_hat = student.velocity_estimator.forward(l.in.obs);
  l.in.e_hat = student.privileged_estimator.forward(env.histories(est::kPrivilegedHistory));
  ppo::TeacherInputs ti;
  ti.obs = l.in.obs;
  ti.c_hat = l.in.c_hat;
  ti.v_hat = teacher.velocity_estimator.forward(l.in.obs);
  ti.privileged = env.privileged();
  ti.domain = env.collision_domains();
  const ppo::TeacherPass pass = teacher.forward(ti, false);
  l.teacher_mean = pass.mean;
  l.latent = pass.p;
  return l;
}

Matrix student_mean(const StudentModel& s, const StudentInputs& in, const Matrix& p_hat, nn::ForwardCache* cache) {
  return s.actor.forward(ppo::assemble_policy_input(in.obs, in.c_hat, in.v_hat, p_hat, in.e_hat), cache);
}

}  // namespace

std::string distill_csv_header() {
  return "iteration,imitation_loss,latent_loss,mean_reward,episodes,success_rate,update_skipped";
}

std::string distill_csv_row(const DistillMetrics& m) {
  return std::to_string(m.iteration) + "," + fmt(m.imitation_loss) + "," + fmt(m.latent_loss) + "," +
         fmt(m.mean_reward) + "," + std::to_string(m.episodes) + "," + fmt(m.success_rate) + "," +
         (m.update_skipped ? "1" : "0");
}

DistillLoss distill_loss_and_grad(StudentModel& s, const DistillRollout& r, double latent_weight, bool accumulate) {
  const int T = r.horizon;
  const double inv_t = 1.0 / T;
  std::vector<ImaginationStepCache> icache(static_cast<std::size_t>(T));
  std::vector<nn::ForwardCache> acache(static_cast<std::size_t>(T));
  std::vector<Matrix> p_hat(static_cast<std::size_t>(T));
  DistillLoss loss;
  Matrix h = r.h0;
  for (int t = 0; t < T; ++t) {
    if (t > 0) reset_hidden(h, r.dones[t - 1]);
    h = s.imagination.step(r.inputs[t].obs, r.inputs[t].c_hat, h, accumulate ? &icache[t] : nullptr);
    p_hat[t] = h;
    const Matrix mu = student_mean(s, r.inputs[t], h, accumulate ? &acache[t] : nullptr);
    loss.imitation += imitation_loss(r.teacher_mean[t], mu).loss * inv_t;
    loss.latent += imitation_loss(r.latent_target[t], h).loss * inv_t;
  }
  if (!accumulate) return loss;

  Matrix carry = Matrix::Zero(r.h0.rows(), r.h0.cols());
  for (int t = T - 1; t >= 0; --t) {
    const Matrix& mu = acache[t].outputs.back();
    const ImitationLoss il = imitation_loss(r.teacher_mean[t], mu);
    const Matrix dx = s.actor.backward(acache[t], il.grad_student * inv_t, true);
    Matrix dh = dx.middleRows(ppo::policy_input::kDomain, est::kDomainLatent) + carry;
    if (latent_weight != 0.0) dh += latent_weight * inv_t * imitation_loss(r.latent_target[t], p_hat[t]).grad_student;
    carry = s.imagination.backward(icache[t], dh);
    if (t > 0) {
      for (Eigen::Index i = 0; i < carry.cols(); ++i)
        if (r.dones[t - 1][i] != 0.0) carry.col(i).setZero();
    }
  }
  return loss;
}

DistillTrainer::DistillTrainer(sim::RobotModel model, task::EnvConfig env, DistillConfig config,
                               ppo::TeacherModel teacher, StudentModel student, std::uint64_t seed)
    : config_(std::move(config)),
      env_(std::move(model), std::move(env), seed, config_.envs),
      teacher_(std::move(teacher)),
      student_(std::move(student)),
      hidden_(Matrix::Zero(kImaginationHidden, config_.envs)),
      rng_(Rng::derive(seed, 0xD157)) {
  opt_ = nn::Adam(refs(), nn::AdamConfig{config_.lr});
}

std::vector<nn::ParamRef> DistillTrainer::refs() {
  auto r = student_.imagination.params();
  r.push_back({&student_.actor.params(), &student_.actor.grads()});
  return r;
}

void DistillTrainer::collect(DistillRollout& r, DistillMetrics& m) {
  const int N = config_.envs;
  r.horizon = config_.horizon;
  r.inputs.clear();
  r.teacher_mean.clear();
  r.latent_target.clear();
  r.dones.clear();
  r.h0 = hidden_;
  std::vector<task::StepInfo> infos;
  int successes = 0;
  for (int t = 0; t < config_.horizon; ++t) {
    Labels l = label_state(env_, teacher_, student_);
    hidden_ = student_.imagination.step(l.in.obs, l.in.c_hat, hidden_, nullptr);
    Matrix action = student_mean(student_, l.in, hidden_, nullptr);
    if (config_.action_noise > 0.0)
      for (Eigen::Index k = 0; k < action.size(); ++k) action.data()[k] += config_.action_noise * rng_.normal();
    env_.step(action, infos);
    Eigen::RowVectorXd done(N);
    for (int i = 0; i < N; ++i) {
      done[i] = infos[i].done ? 1.0 : 0.0;
      m.mean_reward += infos[i].reward.total;
      if (infos[i].done) {
        ++m.episodes;
        successes += infos[i].episode.success ? 1 : 0;
      }
    }
    reset_hidden(hidden_, done);
    r.inputs.push_back(std::move(l.in));
    r.teacher_mean.push_back(std::move(l.teacher_mean));
    r.latent_target.push_back(std::move(l.latent));
    r.dones.push_back(done);
  }
  m.mean_reward /= static_cast<double>(N) * config_.horizon;
  m.success_rate = m.episodes > 0 ? static_cast<double>(successes) / m.episodes : 0.0;
}

DistillMetrics DistillTrainer::iterate() {
  DistillMetrics m;
  DistillRollout r;
  collect(r, m);
  const StudentModel backup = student_;
  BinaryWriter opt_backup;
  opt_.save(opt_backup);
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    student_.imagination.zero_grad();
    student_.actor.zero_grad();
    const DistillLoss loss = distill_loss_and_grad(student_, r, config_.latent_weight, true);
    if (epoch == 0) {
      m.imitation_loss = loss.imitation;
      m.latent_loss = loss.latent;
    }
    const auto rf = refs();
    if (!std::isfinite(loss.imitation + loss.latent) || !nn::grads_finite(rf)) {
      student_ = backup;
      opt_.rebind(refs());
      BinaryReader rd(opt_backup.bytes());
      opt_.load(rd);
      m.update_skipped = true;
      std::fprintf(stderr, "distill update %d: non-finite loss, update rolled back\n", iteration_ + 1);
      break;
    }
    nn::clip_grad_norm(rf, config_.max_grad_norm);
    opt_.step();
  }
  m.iteration = ++iteration_;
  return m;
}

nn::Checkpoint DistillTrainer::save_state() const {
  nn::Checkpoint c;
  student_.save(c);
  BinaryWriter w;
  opt_.save(w);
  env_.save(w);
  w.str(rng_.save());
  w.i64(iteration_);
  for (Eigen::Index k = 0; k < hidden_.size(); ++k) w.f64(hidden_.data()[k]);
  c.put_blob("distill/state", w.take());
  return c;
}

void DistillTrainer::load_state(const nn::Checkpoint& c) {
  student_ = StudentModel::load(c);
  opt_.rebind(refs());
  BinaryReader r(c.get_blob("distill/state"));
  opt_.load(r);
  env_.load(r);
  rng_.load(r.str());
  iteration_ = static_cast<int>(r.i64());
  for (Eigen::Index k = 0; k < hidden_.size(); ++k) hidden_.data()[k] = r.f64();
}

double student_action_error(const sim::RobotModel& model, const task::EnvConfig& env_cfg,
                            const ppo::TeacherModel& teacher, const StudentModel& student, std::uint64_t seed,
                            int envs, int steps) {
  task::VecEnv env(model, env_cfg, seed, envs);
  Matrix h = Matrix::Zero(kImaginationHidden, envs);
  std::vector<task::StepInfo> infos;
  double total = 0.0;
  for (int t = 0; t < steps; ++t) {
    const Labels l = label_state(env, teacher, student);
    h = student.imagination.step(l.in.obs, l.in.c_hat, h, nullptr);
    const Matrix mu = student_mean(student, l.in, h, nullptr);
    total += (mu - l.teacher_mean).cwiseAbs().mean();
    env.step(l.teacher_mean, infos);
    Eigen::RowVectorXd done(envs);
    for (int i = 0; i < envs; ++i) done[i] = infos[i].done ? 1.0 : 0.0;
    reset_hidden(h, done);
  }
  return total / steps;
}

}  // namespace qclab::distill
