#include "qclab/ppo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "qclab/est/losses.hpp"
#include "qclab/ppo/gae.hpp"

namespace qclab::ppo {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void save_blob(nn::Checkpoint& c, const std::string& name, const auto& fn) {
  BinaryWriter w;
  fn(w);
  c.put_blob(name, w.take());
}

}  // namespace

std::string metrics_csv_header() {
  std::string h = "iteration,mean_reward";
  for (int t = 0; t < task::kNumRewardTerms; ++t)
    h += ",r_" + std::string(task::reward_term_name(static_cast<task::RewardTerm>(t)));
  h += ",episodes,episode_length,success_rate,surrogate,value_loss,entropy,approx_kl,clip_fraction,grad_norm,"
       "velocity_mse,roa_loss,reward_scale";
  for (int b = 0; b < kDifficultyBins; ++b) h += ",difficulty_" + std::to_string(b);
  h += ",update_skipped";
  return h;
}

std::string metrics_csv_row(const IterationMetrics& m) {
  std::string r = std::to_string(m.iteration) + "," + fmt(m.mean_reward);
  for (double t : m.terms) r += "," + fmt(t);
  r += "," + std::to_string(m.episodes) + "," + fmt(m.episode_length) + "," + fmt(m.success_rate) + "," +
       fmt(m.surrogate) + "," + fmt(m.value_loss) + "," + fmt(m.entropy) + "," + fmt(m.approx_kl) + "," +
       fmt(m.clip_fraction) + "," + fmt(m.grad_norm) + "," + fmt(m.velocity_mse) + "," + fmt(m.roa_loss) + "," +
       fmt(m.reward_scale);
  for (int c : m.difficulty_histogram) r += "," + std::to_string(c);
  r += m.update_skipped ? ",1" : ",0";
  return r;
}

TeacherTrainer::TeacherTrainer(sim::RobotModel model, task::EnvConfig env, TeacherTrainConfig config,
                               std::uint64_t seed, std::optional<nn::Network> collision_estimator)
    : config_(std::move(config)),
      env_(std::move(model), std::move(env), seed, config_.envs),
      model_(config_.arch),
      collision_estimator_(std::move(collision_estimator)),
      normalizer_(config_.envs, config_.ppo.gamma),
      buffer_(config_.ppo.horizon, config_.envs),
      rng_(Rng::derive(seed, 0x7EAC4E5)) {
  if (collision_estimator_ && (collision_estimator_->input_size() != est::kCollisionHistory * kObsDim ||
                               collision_estimator_->output_size() != kNumFlags))
    throw std::invalid_argument("collision estimator has the wrong shape");
  Rng init = Rng::derive(seed, 0x1417);
  model_.init(init);
  policy_opt_ = nn::Adam(policy_refs(), nn::AdamConfig{config_.ppo.lr});
  velocity_opt_ = nn::Adam({{&model_.velocity_estimator.params(), &model_.velocity_estimator.grads()}},
                           nn::AdamConfig{config_.estimator_lr});
  privileged_opt_ = nn::Adam({{&model_.privileged_estimator.params(), &model_.privileged_estimator.grads()}},
                             nn::AdamConfig{config_.estimator_lr});
}

std::vector<nn::ParamRef> TeacherTrainer::policy_refs() { return model_.policy_params(); }

Matrix TeacherTrainer::collision_estimate(const Matrix& history10) const {
  if (!config_.use_collision_estimate || !collision_estimator_) return Matrix::Zero(kNumFlags, history10.cols());
  return est::sigmoid(collision_estimator_->forward(history10));
}

void TeacherTrainer::collect(RolloutBuffer& buf, IterationMetrics& m) {
  const int N = config_.envs;
  const double gamma = config_.ppo.gamma;
  std::vector<task::StepInfo> infos;
  Eigen::VectorXd raw(N), dones(N);
  double length_sum = 0.0;
  int successes = 0;
  buf.clear();
  for (int t = 0; t < buf.horizon; ++t) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(t) * N;
    TeacherInputs in;
    in.obs = env_.observations();
    in.c_hat = collision_estimate(env_.histories(est::kCollisionHistory));
    in.v_hat = model_.velocity_estimator.forward(in.obs);
    in.privileged = env_.privileged();
    in.domain = env_.collision_domains();
    const TeacherPass pass = model_.forward(in, false);
    const Matrix actions = gaussian_sample(pass.mean, model_.log_std, rng_);

    buf.obs.middleCols(c0, N) = in.obs;
    buf.c_hat.middleCols(c0, N) = in.c_hat;
    buf.v_hat.middleCols(c0, N) = in.v_hat;
    buf.privileged.middleCols(c0, N) = in.privileged;
    buf.domain.middleCols(c0, N) = in.domain;
    buf.history6.middleCols(c0, N) = env_.histories(est::kPrivilegedHistory);
    buf.v_true.middleCols(c0, N) = env_.body_velocities();
    buf.c_true.middleCols(c0, N) = env_.collision_labels();
    buf.actions.middleCols(c0, N) = actions;
    buf.log_prob.segment(c0, N) = gaussian_log_prob(pass.mean, model_.log_std, actions).transpose();
    buf.values.row(t) = pass.value;

    env_.step(actions, infos);
    for (int i = 0; i < N; ++i) {
      const auto& info = infos[i];
      raw[i] = info.reward.total;
      dones[i] = info.done ? 1.0 : 0.0;
      buf.dones(t, i) = dones[i];
      buf.timeouts(t, i) = info.timeout ? 1.0 : 0.0;
      m.mean_reward += info.reward.total;
      for (int k = 0; k < task::kNumRewardTerms; ++k) m.terms[k] += info.reward.terms[k];
      if (info.done) {
        ++m.episodes;
        length_sum += info.episode.time;
        successes += info.episode.success ? 1 : 0;
      }
    }
    Eigen::VectorXd r = config_.ppo.normalize_rewards ? normalizer_.normalize(raw, dones) : raw;
    for (int i = 0; i < N; ++i) {
      if (buf.timeouts(t, i) != 0.0) r[i] += gamma * buf.values(t, i);
      buf.rewards(t, i) = r[i];
    }
    buf.filled = t + 1;
  }
  const double steps = static_cast<double>(buf.size());
  m.mean_reward /= steps;
  for (double& v : m.terms) v /= steps;
  m.episode_length = m.episodes > 0 ? length_sum / m.episodes : 0.0;
  m.success_rate = m.episodes > 0 ? static_cast<double>(successes) / m.episodes : 0.0;
  m.reward_scale = normalizer_.scale();
  for (double d : env_.curriculum().difficulty)
    ++m.difficulty_histogram[std::min(kDifficultyBins - 1, static_cast<int>(d * kDifficultyBins))];
}

void TeacherTrainer::update(RolloutBuffer& buf, IterationMetrics& m) {
  const PpoConfig& pc = config_.ppo;
  TeacherInputs last;
  last.obs = env_.observations();
  last.c_hat = collision_estimate(env_.histories(est::kCollisionHistory));
  last.v_hat = model_.velocity_estimator.forward(last.obs);
  last.privileged = env_.privileged();
  last.domain = env_.collision_domains();
  const Eigen::RowVectorXd bootstrap = model_.forward(last, false).value;

  GaeResult gae = compute_gae(buf.rewards, buf.values, buf.dones, bootstrap, pc.gamma, pc.lambda);
  const Matrix returns_tm = gae.returns;
  normalize_advantages(gae.advantages);
  // flatten time-major T x N into sample order t * N + i
  const Eigen::Index n = static_cast<Eigen::Index>(buf.size());
  Eigen::RowVectorXd adv(n), ret(n);
  for (int t = 0; t < buf.horizon; ++t)
    for (int i = 0; i < buf.envs; ++i) {
      adv[static_cast<Eigen::Index>(t) * buf.envs + i] = gae.advantages(t, i);
      ret[static_cast<Eigen::Index>(t) * buf.envs + i] = returns_tm(t, i);
    }

  // snapshot for rollback on a non-finite update
  const TeacherModel backup = model_;
  BinaryWriter opt_backup;
  policy_opt_.save(opt_backup);
  velocity_opt_.save(opt_backup);
  privileged_opt_.save(opt_backup);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  const Eigen::Index mb = n / pc.minibatches;
  int updates = 0;
  bool failed = false;
  for (int epoch = 0; epoch < pc.epochs && !failed; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i)
      std::swap(order[i], order[rng_.below(static_cast<std::uint64_t>(i + 1))]);
    for (int b = 0; b < pc.minibatches && !failed; ++b) {
      const std::vector<Eigen::Index> cols(order.begin() + b * mb, order.begin() + (b + 1) * mb);
      const TeacherInputs in = buf.gather(cols);
      const TeacherPass pass = model_.forward(in, true);
      Eigen::RowVectorXd old_lp(mb), a(mb), r(mb);
      for (Eigen::Index k = 0; k < mb; ++k) {
        old_lp[k] = buf.log_prob[cols[k]];
        a[k] = adv[cols[k]];
        r[k] = ret[cols[k]];
      }
      const PpoLossTerms lt = ppo_loss(pass.mean, model_.log_std, gather_columns(buf.actions, cols), old_lp, a,
                                       pass.value, r, pc.clip, pc.value_coef, pc.entropy_coef);

      nn::ForwardCache pe_cache;
      const Matrix e_hat = model_.privileged_estimator.forward(gather_columns(buf.history6, cols), &pe_cache);
      const est::RoaLoss roa = est::roa_loss(e_hat, pass.e, config_.roa_lambda);

      model_.zero_policy_grads();
      model_.backward(pass, lt.grad_mean, lt.grad_value, &roa.grad_latent);
      model_.log_std_grad = lt.grad_log_std;
      const auto refs = policy_refs();
      if (!std::isfinite(lt.loss) || !nn::grads_finite(refs)) {
        failed = true;
        break;
      }
      m.grad_norm += nn::clip_grad_norm(refs, pc.max_grad_norm);
      policy_opt_.step();

      model_.privileged_estimator.zero_grad();
      model_.privileged_estimator.backward(pe_cache, roa.grad_estimate, false);
      privileged_opt_.step();

      nn::ForwardCache ve_cache;
      const Matrix obs = gather_columns(buf.obs, cols);
      const Matrix v = model_.velocity_estimator.forward(obs, &ve_cache);
      const est::LossGrad vl = est::squared_error(v, gather_columns(buf.v_true, cols));
      model_.velocity_estimator.zero_grad();
      model_.velocity_estimator.backward(ve_cache, vl.grad, false);
      velocity_opt_.step();

      m.surrogate += lt.surrogate;
      m.value_loss += lt.value_loss;
      m.entropy += lt.entropy;
      m.approx_kl += lt.approx_kl;
      m.clip_fraction += lt.clip_fraction;
      m.roa_loss += roa.loss;
      m.velocity_mse += vl.loss;
      ++updates;
    }
  }
  if (failed) {
    model_ = backup;
    policy_opt_.rebind(policy_refs());
    velocity_opt_.rebind({{&model_.velocity_estimator.params(), &model_.velocity_estimator.grads()}});
    privileged_opt_.rebind({{&model_.privileged_estimator.params(), &model_.privileged_estimator.grads()}});
    BinaryReader r(opt_backup.bytes());
    policy_opt_.load(r);
    velocity_opt_.load(r);
    privileged_opt_.load(r);
    m.update_skipped = true;
    std::fprintf(stderr, "teacher update %d: non-finite loss, update rolled back\n", iteration_ + 1);
  }
  if (updates > 0) {
    for (double* v : {&m.surrogate, &m.value_loss, &m.entropy, &m.approx_kl, &m.clip_fraction, &m.grad_norm,
                      &m.roa_loss, &m.velocity_mse})
      *v /= updates;
  }
  buf.clear();
}

IterationMetrics TeacherTrainer::iterate() {
  IterationMetrics m;
  collect(buffer_, m);
  update(buffer_, m);
  m.iteration = ++iteration_;
  return m;
}

nn::Checkpoint TeacherTrainer::save_state() const {
  nn::Checkpoint c;
  model_.save(c);
  if (collision_estimator_) c.put_network("estimator/collision", *collision_estimator_);
  save_blob(c, "train/optimizers", [&](BinaryWriter& w) {
    policy_opt_.save(w);
    velocity_opt_.save(w);
    privileged_opt_.save(w);
  });
  save_blob(c, "train/normalizer", [&](BinaryWriter& w) { normalizer_.save(w); });
  save_blob(c, "train/env", [&](BinaryWriter& w) { env_.save(w); });
  save_blob(c, "train/progress", [&](BinaryWriter& w) {
    w.str(rng_.save());
    w.i64(iteration_);
  });
  return c;
}

void TeacherTrainer::load_state(const nn::Checkpoint& c) {
  model_ = TeacherModel::load(c);
  if (c.has("estimator/collision")) collision_estimator_ = c.get_network("estimator/collision");
  policy_opt_.rebind(policy_refs());
  velocity_opt_.rebind({{&model_.velocity_estimator.params(), &model_.velocity_estimator.grads()}});
  privileged_opt_.rebind({{&model_.privileged_estimator.params(), &model_.privileged_estimator.grads()}});
  {
    BinaryReader r(c.get_blob("train/optimizers"));
    policy_opt_.load(r);
    velocity_opt_.load(r);
    privileged_opt_.load(r);
  }
  {
    BinaryReader r(c.get_blob("train/normalizer"));
    normalizer_.load(r);
  }
  {
    BinaryReader r(c.get_blob("train/env"));
    env_.load(r);
  }
  BinaryReader r(c.get_blob("train/progress"));
  rng_.load(r.str());
  iteration_ = static_cast<int>(r.i64());
}

}  // namespace qclab::ppo
