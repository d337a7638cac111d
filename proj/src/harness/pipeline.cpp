#include "qclab/harness/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "qclab/common/binary_io.hpp"
#include "qclab/est/heads.hpp"
#include "qclab/harness/datagen.hpp"
#include "qclab/harness/eval.hpp"
#include "qclab/harness/policy.hpp"

namespace qclab::harness {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 6> kStageNames{"gen-dataset", "train-estimator", "train-teacher",
                                                      "distill",     "eval",            "dump-latents"};

std::string out_path(const ExperimentConfig& c, const char* name) { return (fs::path(c.out_dir) / name).string(); }

void require(const std::string& path, std::string_view producer) {
  if (!fs::exists(path))
    throw PrerequisiteError("missing prerequisite " + path + " (run the " + std::string(producer) + " stage first)");
}

nn::Checkpoint load_checked(const std::string& path, const ExperimentConfig& c, std::string_view producer) {
  require(path, producer);
  nn::Checkpoint ckpt = nn::Checkpoint::load(path);
  if (ckpt.config_hash != c.architecture_hash()) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: architecture hash %016llx does not match the config (%016llx)",
                  path.c_str(), static_cast<unsigned long long>(ckpt.config_hash),
                  static_cast<unsigned long long>(c.architecture_hash()));
    throw nn::CheckpointError(nn::CheckpointError::Kind::Version, buf);
  }
  return ckpt;
}

void save_checked(nn::Checkpoint ckpt, const std::string& path, const ExperimentConfig& c) {
  ckpt.config_hash = c.architecture_hash();
  ckpt.save(path);
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void update_manifest(const ExperimentConfig& c, Stage stage, Json result) {
  const std::string path = out_path(c, artifact::kManifest);
  Json m = Json::object();
  if (fs::exists(path)) {
    try {
      m = Json::parse(read_file(path));
    } catch (const Json::exception&) {
      m = Json::object();
    }
  }
  m["qclab_version"] = kVersion;
  m["checkpoint_format"] = nn::kCheckpointVersion;
  m["config_hash"] = hex(c.hash());
  m["architecture_hash"] = hex(c.architecture_hash());
  m["seed"] = c.seed;
  m["envs"] = c.envs;
  result["config_hash"] = hex(c.hash());
  result["seed"] = c.seed;
  m["stages"][std::string(stage_name(stage))] = std::move(result);
  write_file_atomic(path, m.dump(2) + "\n");
}

// Keeps the header and the rows of iterations <= `iteration`.
void truncate_metrics(const std::string& path, const std::string& header, int iteration) {
  std::string out = header + "\n";
  if (fs::exists(path)) {
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const int it = std::atoi(line.substr(0, line.find(',')).c_str());
      if (it >= 1 && it <= iteration) out += line + "\n";
    }
  }
  write_file_atomic(path, out);
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream f(path, std::ios::app | std::ios::binary);
  if (!f) throw std::runtime_error("cannot append to " + path);
  f << line << '\n';
  f.flush();
}

void say(const StageOptions& o, const std::string& msg) {
  if (!o.quiet) std::printf("%s\n", msg.c_str());
}

std::optional<nn::Network> load_estimator_for(const ExperimentConfig& c, bool needed) {
  if (!needed) return std::nullopt;
  const nn::Checkpoint ckpt = load_checked(out_path(c, artifact::kEstimator), c, "train-estimator");
  nn::Network net = ckpt.get_network("estimator/collision");
  if (net.input_size() != est::kCollisionHistory * kObsDim)
    throw ConfigError("collision estimator history does not match the policy input");
  return net;
}

// ---------------------------------------------------------------------------

void gen_dataset(const ExperimentConfig& c, const StageOptions& o) {
  const auto model = sim::RobotModel::go2();
  const est::CollisionDataset data =
      generate_collision_dataset(model, datagen_env_config(c.env), c.datagen, c.seed);
  data.save(out_path(c, artifact::kDataset));
  long positives = 0;
  for (Eigen::Index i = 0; i < data.labels.cols(); ++i) positives += data.labels.col(i).maxCoeff() > 0.0 ? 1 : 0;
  say(o, "gen-dataset: " + std::to_string(data.size()) + " transitions, " + std::to_string(positives) +
             " with contact");
  update_manifest(c, Stage::GenDataset,
                  {{"transitions", data.size()}, {"with_contact", positives}, {"artifacts", {artifact::kDataset}}});
}

void train_estimator(const ExperimentConfig& c, const StageOptions& o) {
  const std::string dpath = out_path(c, artifact::kDataset);
  require(dpath, "gen-dataset");
  est::CollisionDataset data;
  try {
    data = est::CollisionDataset::load(dpath);
  } catch (const std::runtime_error& e) {
    throw nn::CheckpointError(nn::CheckpointError::Kind::Truncated, e.what());
  }
  if (data.history < est::kCollisionHistory) throw ConfigError("dataset history shorter than the estimator input");
  data = data.with_history(est::kCollisionHistory);

  est::CollisionTrainConfig tc = c.estimator;
  tc.seed = c.seed;
  std::string csv = "step,train_bce,heldout_bce,baseline_bce";
  for (int f = 0; f < kNumFlags; ++f) csv += ",auroc_" + std::to_string(f);
  csv += "\n";
  auto on_eval = [&](const est::CollisionMetrics& m) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g", m.step, m.train_bce, m.heldout_bce, m.baseline_bce);
    std::string row = buf;
    for (double a : m.auroc) {
      std::snprintf(buf, sizeof(buf), ",%.9g", a);
      row += buf;
    }
    csv += row + "\n";
    say(o, "train-estimator: step " + std::to_string(m.step) + " held-out bce " + std::to_string(m.heldout_bce) +
               " baseline " + std::to_string(m.baseline_bce));
  };
  const est::CollisionTrainResult r = est::train_collision_estimator(data, tc, on_eval);
  if (!r.net.params().allFinite()) throw NonFiniteError("collision estimator parameters are not finite");
  nn::Checkpoint ckpt;
  ckpt.put_network("estimator/collision", r.net);
  save_checked(std::move(ckpt), out_path(c, artifact::kEstimator), c);
  write_file_atomic(out_path(c, artifact::kEstimatorMetrics), csv);
  Json auroc = Json::array();
  for (int f = 0; f < kNumFlags; ++f)
    auroc.push_back(r.final_metrics.positives[f] >= 100 ? Json(r.final_metrics.auroc[f]) : Json(nullptr));
  update_manifest(c, Stage::TrainEstimator,
                  {{"heldout_bce", r.final_metrics.heldout_bce},
                   {"baseline_bce", r.final_metrics.baseline_bce},
                   {"auroc", auroc},
                   {"artifacts", {artifact::kEstimator, artifact::kEstimatorMetrics}}});
}

void train_teacher(const ExperimentConfig& c, const StageOptions& o) {
  const auto collision = load_estimator_for(c, c.teacher.use_collision_estimate);
  ppo::TeacherTrainer trainer(sim::RobotModel::go2(), c.env, c.teacher, c.seed, collision);
  const std::string state_path = out_path(c, artifact::kTeacherState);
  const std::string csv_path = out_path(c, artifact::kTeacherMetrics);
  if (fs::exists(state_path)) {
    trainer.load_state(load_checked(state_path, c, "train-teacher"));
    say(o, "train-teacher: resuming after iteration " + std::to_string(trainer.iteration()));
  }
  truncate_metrics(csv_path, ppo::metrics_csv_header(), trainer.iteration());

  int skipped = 0;
  ppo::IterationMetrics last;
  while (trainer.iteration() < c.teacher_iterations) {
    last = trainer.iterate();
    append_line(csv_path, ppo::metrics_csv_row(last));
    skipped = last.update_skipped ? skipped + 1 : 0;
    if (skipped > c.max_skipped_updates)
      throw NonFiniteError("train-teacher: " + std::to_string(skipped) + " consecutive non-finite updates");
    if (trainer.iteration() % c.checkpoint_every == 0 || trainer.iteration() == c.teacher_iterations)
      save_checked(trainer.save_state(), state_path, c);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "train-teacher: it %d reward %.4f r_vel %.4f success %.3f", last.iteration,
                  last.mean_reward, last.terms[static_cast<int>(task::RewardTerm::GoalVelocity)],
                  last.success_rate);
    say(o, buf);
  }
  nn::Checkpoint out;
  trainer.model().save(out);
  if (trainer.collision_estimator()) out.put_network("estimator/collision", *trainer.collision_estimator());
  save_checked(std::move(out), out_path(c, artifact::kTeacher), c);
  update_manifest(c, Stage::TrainTeacher,
                  {{"iterations", trainer.iteration()},
                   {"use_collision_estimate", c.teacher.use_collision_estimate},
                   {"artifacts", {artifact::kTeacher, artifact::kTeacherState, artifact::kTeacherMetrics}}});
}

struct TeacherBundle {
  ppo::TeacherModel model;
  std::optional<nn::Network> collision;
};

TeacherBundle load_teacher(const ExperimentConfig& c) {
  const nn::Checkpoint ckpt = load_checked(out_path(c, artifact::kTeacher), c, "train-teacher");
  TeacherBundle b{ppo::TeacherModel::load(ckpt), std::nullopt};
  if (ckpt.has("estimator/collision")) b.collision = ckpt.get_network("estimator/collision");
  return b;
}

void distill_stage(const ExperimentConfig& c, const StageOptions& o) {
  TeacherBundle t = load_teacher(c);
  const auto collision = c.teacher.use_collision_estimate ? t.collision : std::nullopt;
  if (c.teacher.use_collision_estimate && !collision)
    throw PrerequisiteError("teacher checkpoint carries no collision estimator");
  Rng rng = Rng::derive(c.seed, 0x57D);
  distill::DistillTrainer trainer(sim::RobotModel::go2(), c.env, c.distill, t.model,
                                  distill::StudentModel::from_teacher(t.model, collision, rng), c.seed);
  const std::string state_path = out_path(c, artifact::kDistillState);
  const std::string csv_path = out_path(c, artifact::kDistillMetrics);
  if (fs::exists(state_path)) {
    trainer.load_state(load_checked(state_path, c, "distill"));
    say(o, "distill: resuming after iteration " + std::to_string(trainer.iteration()));
  }
  truncate_metrics(csv_path, distill::distill_csv_header(), trainer.iteration());
  int skipped = 0;
  while (trainer.iteration() < c.distill_iterations) {
    const distill::DistillMetrics m = trainer.iterate();
    append_line(csv_path, distill::distill_csv_row(m));
    skipped = m.update_skipped ? skipped + 1 : 0;
    if (skipped > c.max_skipped_updates)
      throw NonFiniteError("distill: " + std::to_string(skipped) + " consecutive non-finite updates");
    if (trainer.iteration() % c.checkpoint_every == 0 || trainer.iteration() == c.distill_iterations)
      save_checked(trainer.save_state(), state_path, c);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "distill: it %d imitation %.6f latent %.6f", m.iteration, m.imitation_loss,
                  m.latent_loss);
    say(o, buf);
  }
  nn::Checkpoint out;
  trainer.student().save(out);
  save_checked(std::move(out), out_path(c, artifact::kStudent), c);
  // held-out states: teacher-driven rollouts on a separate seed
  const double err = distill::student_action_error(sim::RobotModel::go2(), c.env, t.model, trainer.student(),
                                                   c.seed ^ 0xE7A1ull, c.action_error_envs, c.action_error_steps);
  say(o, "distill: held-out action error " + std::to_string(err));
  update_manifest(c, Stage::Distill,
                  {{"iterations", trainer.iteration()},
                   {"action_error", err},
                   {"artifacts", {artifact::kStudent, artifact::kDistillState, artifact::kDistillMetrics}}});
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& c) {
  if (c.eval.policy == "zero") return std::make_unique<ZeroPolicy>();
  if (c.eval.policy == "scripted") return std::make_unique<ScriptedPolicy>();
  if (c.eval.policy == "teacher") {
    TeacherBundle t = load_teacher(c);
    return std::make_unique<TeacherPolicy>(std::move(t.model), std::move(t.collision),
                                           c.teacher.use_collision_estimate);
  }
  const nn::Checkpoint ckpt = load_checked(out_path(c, artifact::kStudent), c, "distill");
  return std::make_unique<StudentPolicy>(distill::StudentModel::load(ckpt));
}

void eval_stage(const ExperimentConfig& c, const StageOptions& o) {
  auto policy = make_policy(c);
  const auto rows = evaluate_policy(sim::RobotModel::go2(), c.env, c.eval, *policy, c.seed);
  std::string csv = eval_csv_header() + "\n";
  Json summary = Json::array();
  for (const auto& r : rows) {
    csv += eval_csv_row(policy->name(), r) + "\n";
    say(o, "eval: " + eval_csv_row(policy->name(), r));
    summary.push_back({{"kind", sim::kind_name(r.kind)}, {"l", r.l}, {"success_rate", r.success_rate}});
  }
  write_file_atomic(out_path(c, artifact::kEval), csv);
  update_manifest(c, Stage::Eval, {{"policy", policy->name()}, {"rows", summary}, {"artifacts", {artifact::kEval}}});
}

void dump_latents(const ExperimentConfig& c, const StageOptions& o) {
  const nn::Checkpoint ckpt = load_checked(out_path(c, artifact::kStudent), c, "distill");
  StudentPolicy policy(distill::StudentModel::load(ckpt));
  task::EnvConfig ec = c.env;
  ec.kind_mix.clear();
  for (int k = 0; k < sim::kNumObstacleKinds; ++k) ec.kind_mix.emplace_back(static_cast<sim::ObstacleKind>(k), 1.0);
  ec.curriculum = false;
  ec.random_difficulty = true;
  task::VecEnv env(sim::RobotModel::go2(), ec, c.seed, c.latent_envs);
  std::string csv = "step,env,kind,difficulty,l";
  for (int j = 0; j < distill::kImaginationHidden; ++j) csv += ",p" + std::to_string(j);
  csv += "\n";
  std::vector<task::StepInfo> infos;
  policy.begin(env.size());
  long rows = 0;
  char buf[64];
  for (int t = 0; t < c.latent_steps; ++t) {
    const Matrix a = policy.act(env);
    if (t % c.latent_stride == 0) {
      for (int i = 0; i < env.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%d,", t, i);
        csv += buf;
        csv += std::string(sim::kind_name(env.curriculum().kind[i]));
        std::snprintf(buf, sizeof(buf), ",%.6g,%.6g", env.curriculum().difficulty[i],
                      env.slot(i).obstacles.difficulty_param);
        csv += buf;
        for (int j = 0; j < distill::kImaginationHidden; ++j) {
          std::snprintf(buf, sizeof(buf), ",%.6g", policy.hidden()(j, i));
          csv += buf;
        }
        csv += "\n";
        ++rows;
      }
    }
    env.step(a, infos);
    policy.after_step(infos);
  }
  write_file_atomic(out_path(c, artifact::kLatents), csv);
  say(o, "dump-latents: " + std::to_string(rows) + " rows");
  update_manifest(c, Stage::DumpLatents, {{"rows", rows}, {"artifacts", {artifact::kLatents}}});
}

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames.at(static_cast<std::size_t>(s)); }

Stage stage_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kStageNames.size(); ++i)
    if (kStageNames[i] == name) return static_cast<Stage>(i);
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

void run_stage(Stage stage, const ExperimentConfig& c, const StageOptions& o) {
  fs::create_directories(c.out_dir);
  switch (stage) {
    case Stage::GenDataset: return gen_dataset(c, o);
    case Stage::TrainEstimator: return train_estimator(c, o);
    case Stage::TrainTeacher: return train_teacher(c, o);
    case Stage::Distill: return distill_stage(c, o);
    case Stage::Eval: return eval_stage(c, o);
    case Stage::DumpLatents: return dump_latents(c, o);
  }
}

int run_stage_status(Stage stage, const ExperimentConfig& c, const StageOptions& o) {
  try {
    run_stage(stage, c, o);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PrerequisiteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingPrerequisite;
  } catch (const nn::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitBadCheckpoint;
  } catch (const NonFiniteError& e) {
    std::cerr << "non-finite fault: " << e.what() << "\n";
    return kExitNonFinite;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace qclab::harness
