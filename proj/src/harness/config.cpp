#include "qclab/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qclab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw ConfigError("config: bad value '" + v + "' for " + key);
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config: expected true or false for " + key + ", got '" + v + "'");
}

sim::ObstacleKind parse_kind(const std::string& key, const std::string& v) {
  try {
    return sim::kind_from_name(v);
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: unknown obstacle kind '" + v + "' for " + key);
  }
}

struct Entry {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  bool architecture = false;
};

template <class T, class Field>
Entry integer(std::string key, Field field, bool arch = false) {
  return {key, [field](const ExperimentConfig& c) { return std::to_string(field(const_cast<ExperimentConfig&>(c))); },
          [field, key](ExperimentConfig& c, const std::string& v) { field(c) = parse_number<T>(key, v); }, arch};
}

template <class Field>
Entry real(std::string key, Field field) {
  return {key, [field](const ExperimentConfig& c) { return fmt(field(const_cast<ExperimentConfig&>(c))); },
          [field, key](ExperimentConfig& c, const std::string& v) { field(c) = parse_number<double>(key, v); }};
}

template <class Field>
Entry boolean(std::string key, Field field) {
  return {key,
          [field](const ExperimentConfig& c) {
            return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          },
          [field, key](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(key, v); }};
}

template <class Field>
Entry text(std::string key, Field field) {
  return {key, [field](const ExperimentConfig& c) { return field(const_cast<ExperimentConfig&>(c)); },
          [field](ExperimentConfig& c, const std::string& v) { field(c) = v; }};
}

template <class Field>
Entry int_list(std::string key, Field field, bool arch) {
  return {key,
          [field](const ExperimentConfig& c) {
            std::string s;
            for (int v : field(const_cast<ExperimentConfig&>(c))) s += (s.empty() ? "" : ",") + std::to_string(v);
            return s;
          },
          [field, key](ExperimentConfig& c, const std::string& v) {
            std::vector<int> out;
            for (const auto& item : split(v, ',')) {
              const int n = parse_number<int>(key, item);
              if (n <= 0) throw ConfigError("config: layer sizes must be positive in " + key);
              out.push_back(n);
            }
            if (out.empty()) throw ConfigError("config: empty list for " + key);
            field(c) = out;
          },
          arch};
}

template <class Field>
Entry optional_real(std::string key, Field field) {
  return {key,
          [field](const ExperimentConfig& c) {
            const auto& o = field(const_cast<ExperimentConfig&>(c));
            return o ? fmt(*o) : std::string("none");
          },
          [field, key](ExperimentConfig& c, const std::string& v) {
            if (v == "none")
              field(c).reset();
            else
              field(c) = parse_number<double>(key, v);
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    using C = ExperimentConfig;
    std::vector<Entry> t;
    t.push_back(integer<std::uint64_t>("seed", [](C& c) -> auto& { return c.seed; }));
    t.push_back(integer<int>("envs", [](C& c) -> auto& { return c.envs; }));
    t.push_back(text("out_dir", [](C& c) -> auto& { return c.out_dir; }));

    t.push_back({"env.kinds",
                 [](const C& c) {
                   std::string s;
                   for (const auto& [k, w] : c.env.kind_mix)
                     s += (s.empty() ? "" : ",") + std::string(sim::kind_name(k)) + ":" + fmt(w);
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   std::vector<std::pair<sim::ObstacleKind, double>> mix;
                   for (const auto& item : split(v, ',')) {
                     const auto colon = item.find(':');
                     if (colon == std::string::npos) throw ConfigError("config: env.kinds expects kind:weight items");
                     const double w = parse_number<double>("env.kinds", trim(item.substr(colon + 1)));
                     if (!(w > 0.0)) throw ConfigError("config: env.kinds weights must be positive");
                     mix.emplace_back(parse_kind("env.kinds", trim(item.substr(0, colon))), w);
                   }
                   if (mix.empty()) throw ConfigError("config: env.kinds is empty");
                   c.env.kind_mix = mix;
                 }});
    t.push_back(boolean("env.curriculum", [](C& c) -> auto& { return c.env.curriculum; }));
    t.push_back(real("env.initial_difficulty", [](C& c) -> auto& { return c.env.initial_difficulty; }));
    t.push_back(boolean("env.random_difficulty", [](C& c) -> auto& { return c.env.random_difficulty; }));
    t.push_back(optional_real("env.fixed_l", [](C& c) -> auto& { return c.env.fixed_l; }));
    t.push_back(optional_real("env.fixed_command", [](C& c) -> auto& { return c.env.fixed_command; }));
    t.push_back(real("env.episode_length_s", [](C& c) -> auto& { return c.env.episode_length_s; }));
    t.push_back(boolean("env.randomize", [](C& c) -> auto& { return c.env.randomization.enabled; }));
    t.push_back(boolean("env.observation_noise", [](C& c) -> auto& { return c.env.obs_noise.enabled; }));
    for (int i = 0; i < task::kNumRewardTerms; ++i) {
      const std::string name(task::reward_term_name(static_cast<task::RewardTerm>(i)));
      t.push_back(real("reward." + name, [i](C& c) -> auto& { return c.env.weights.w[i]; }));
    }

    t.push_back(integer<long>("datagen.transitions", [](C& c) -> auto& { return c.datagen.transitions; }));
    t.push_back(integer<int>("datagen.envs", [](C& c) -> auto& { return c.datagen.envs; }));
    t.push_back(real("datagen.action_noise", [](C& c) -> auto& { return c.datagen.action_noise; }));

    t.push_back(integer<int>("estimator.steps", [](C& c) -> auto& { return c.estimator.steps; }));
    t.push_back(integer<int>("estimator.batch_size", [](C& c) -> auto& { return c.estimator.batch_size; }));
    t.push_back(real("estimator.lr", [](C& c) -> auto& { return c.estimator.lr; }));
    t.push_back(real("estimator.positive_fraction", [](C& c) -> auto& { return c.estimator.positive_fraction; }));
    t.push_back(real("estimator.holdout_fraction", [](C& c) -> auto& { return c.estimator.holdout_fraction; }));
    t.push_back(integer<int>("estimator.eval_every", [](C& c) -> auto& { return c.estimator.eval_every; }));
    t.push_back(integer<int>("estimator.channels", [](C& c) -> auto& { return c.estimator.channels; }, true));

    t.push_back(real("ppo.gamma", [](C& c) -> auto& { return c.teacher.ppo.gamma; }));
    t.push_back(real("ppo.lambda", [](C& c) -> auto& { return c.teacher.ppo.lambda; }));
    t.push_back(integer<int>("ppo.epochs", [](C& c) -> auto& { return c.teacher.ppo.epochs; }));
    t.push_back(integer<int>("ppo.minibatches", [](C& c) -> auto& { return c.teacher.ppo.minibatches; }));
    t.push_back(real("ppo.entropy_coef", [](C& c) -> auto& { return c.teacher.ppo.entropy_coef; }));
    t.push_back(real("ppo.value_coef", [](C& c) -> auto& { return c.teacher.ppo.value_coef; }));
    t.push_back(real("ppo.clip", [](C& c) -> auto& { return c.teacher.ppo.clip; }));
    t.push_back(real("ppo.lr", [](C& c) -> auto& { return c.teacher.ppo.lr; }));
    t.push_back(real("ppo.max_grad_norm", [](C& c) -> auto& { return c.teacher.ppo.max_grad_norm; }));
    t.push_back(integer<int>("ppo.horizon", [](C& c) -> auto& { return c.teacher.ppo.horizon; }));
    t.push_back(boolean("ppo.normalize_rewards", [](C& c) -> auto& { return c.teacher.ppo.normalize_rewards; }));

    t.push_back(int_list("teacher.hidden", [](C& c) -> auto& { return c.teacher.arch.hidden; }, true));
    t.push_back(real("teacher.init_log_std", [](C& c) -> auto& { return c.teacher.arch.init_log_std; }));
    t.push_back(real("teacher.roa_lambda", [](C& c) -> auto& { return c.teacher.roa_lambda; }));
    t.push_back(real("teacher.estimator_lr", [](C& c) -> auto& { return c.teacher.estimator_lr; }));
    t.push_back(boolean("teacher.use_collision_estimate", [](C& c) -> auto& { return c.teacher.use_collision_estimate; }));
    t.push_back(integer<int>("teacher.iterations", [](C& c) -> auto& { return c.teacher_iterations; }));
    t.push_back(integer<int>("teacher.checkpoint_every", [](C& c) -> auto& { return c.checkpoint_every; }));
    t.push_back(integer<int>("teacher.max_skipped_updates", [](C& c) -> auto& { return c.max_skipped_updates; }));

    t.push_back(integer<int>("distill.iterations", [](C& c) -> auto& { return c.distill_iterations; }));
    t.push_back(integer<int>("distill.horizon", [](C& c) -> auto& { return c.distill.horizon; }));
    t.push_back(integer<int>("distill.epochs", [](C& c) -> auto& { return c.distill.epochs; }));
    t.push_back(real("distill.lr", [](C& c) -> auto& { return c.distill.lr; }));
    t.push_back(real("distill.latent_weight", [](C& c) -> auto& { return c.distill.latent_weight; }));
    t.push_back(real("distill.max_grad_norm", [](C& c) -> auto& { return c.distill.max_grad_norm; }));
    t.push_back(real("distill.action_noise", [](C& c) -> auto& { return c.distill.action_noise; }));
    t.push_back(integer<int>("distill.action_error_envs", [](C& c) -> auto& { return c.action_error_envs; }));
    t.push_back(integer<int>("distill.action_error_steps", [](C& c) -> auto& { return c.action_error_steps; }));

    t.push_back({"eval.kinds",
                 [](const C& c) {
                   std::string s;
                   for (auto k : c.eval.kinds) s += (s.empty() ? "" : ",") + std::string(sim::kind_name(k));
                   return s;
                 },
                 [](C& c, const std::string& v) {
                   std::vector<sim::ObstacleKind> kinds;
                   for (const auto& item : split(v, ',')) kinds.push_back(parse_kind("eval.kinds", item));
                   if (kinds.empty()) throw ConfigError("config: eval.kinds is empty");
                   c.eval.kinds = kinds;
                 }});
    t.push_back(integer<int>("eval.episodes", [](C& c) -> auto& { return c.eval.episodes; }));
    t.push_back(integer<int>("eval.points", [](C& c) -> auto& { return c.eval.points; }));
    t.push_back(real("eval.command", [](C& c) -> auto& { return c.eval.command; }));
    t.push_back(real("eval.episode_length_s", [](C& c) -> auto& { return c.eval.episode_length_s; }));
    t.push_back(boolean("eval.randomize", [](C& c) -> auto& { return c.eval.randomize; }));
    t.push_back({"eval.policy", [](const C& c) { return c.eval.policy; },
                 [](C& c, const std::string& v) {
                   if (v != "student" && v != "teacher" && v != "zero" && v != "scripted")
                     throw ConfigError("config: eval.policy must be student, teacher, zero or scripted");
                   c.eval.policy = v;
                 }});

    t.push_back(integer<int>("latents.envs", [](C& c) -> auto& { return c.latent_envs; }));
    t.push_back(integer<int>("latents.steps", [](C& c) -> auto& { return c.latent_steps; }));
    t.push_back(integer<int>("latents.stride", [](C& c) -> auto& { return c.latent_stride; }));
    return t;
  }();
  return table;
}

void validate(const ExperimentConfig& c) {
  auto positive = [](long v, const char* key) {
    if (v <= 0) throw ConfigError(std::string("config: ") + key + " must be positive");
  };
  positive(c.envs, "envs");
  positive(c.datagen.transitions, "datagen.transitions");
  positive(c.datagen.envs, "datagen.envs");
  positive(c.estimator.steps, "estimator.steps");
  positive(c.estimator.batch_size, "estimator.batch_size");
  positive(c.teacher.ppo.horizon, "ppo.horizon");
  positive(c.teacher.ppo.epochs, "ppo.epochs");
  positive(c.teacher.ppo.minibatches, "ppo.minibatches");
  positive(c.teacher_iterations, "teacher.iterations");
  positive(c.checkpoint_every, "teacher.checkpoint_every");
  positive(c.distill_iterations, "distill.iterations");
  positive(c.distill.horizon, "distill.horizon");
  positive(c.eval.episodes, "eval.episodes");
  positive(c.eval.points, "eval.points");
  positive(c.latent_envs, "latents.envs");
  positive(c.latent_steps, "latents.steps");
  positive(c.latent_stride, "latents.stride");
  if (c.envs * c.teacher.ppo.horizon < c.teacher.ppo.minibatches)
    throw ConfigError("config: fewer samples per rollout than minibatches");
  if (!(c.estimator.holdout_fraction > 0.0 && c.estimator.holdout_fraction < 1.0))
    throw ConfigError("config: estimator.holdout_fraction must lie in (0, 1)");
  if (!(c.env.initial_difficulty >= 0.0 && c.env.initial_difficulty <= 1.0))
    throw ConfigError("config: env.initial_difficulty must lie in [0, 1]");
  if (!(c.env.episode_length_s > 0.0) || !(c.eval.episode_length_s > 0.0))
    throw ConfigError("config: episode lengths must be positive");
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentConfig::ExperimentConfig() {
  teacher.envs = envs;
  distill.envs = envs;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.push_back(e.key);
  return keys;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::map<std::string, const Entry*> index;
  for (const auto& e : entries()) index[e.key] = &e;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (seen.count(key)) throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    seen[key] = line_no;
    it->second->set(c, value);
  }
  c.teacher.envs = c.envs;
  c.distill.envs = c.envs;
  validate(c);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (e.key != key) continue;
    e.set(*this, value);
    teacher.envs = envs;
    distill.envs = envs;
    validate(*this);
    return;
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

std::string ExperimentConfig::to_text() const {
  std::string out;
  for (const auto& e : entries()) out += e.key + " = " + e.get(*this) + "\n";
  return out;
}

std::uint64_t ExperimentConfig::architecture_hash() const {
  std::string s;
  for (const auto& e : entries())
    if (e.architecture) s += e.key + "=" + e.get(*this) + ";";
  return fnv1a(s);
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_text()); }

}  // namespace qclab::harness
