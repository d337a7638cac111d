#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qclab/harness/pipeline.hpp"

using namespace qclab::harness;

int main(int argc, char** argv) {
  CLI::App app{"qclab: collision-aware quadruped locomotion pipeline"};
  std::string stage_arg, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> envs;
  bool quiet = false;
  app.add_option("stage", stage_arg, "gen-dataset | train-estimator | train-teacher | distill | eval | dump-latents")
      ->required();
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--envs", envs, "override the number of training environments");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--quiet", quiet, "no progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  Stage stage;
  ExperimentConfig config;
  try {
    stage = stage_from_name(stage_arg);
    config = ExperimentConfig::load(config_path);
    if (seed) config.set("seed", std::to_string(*seed));
    if (envs) config.set("envs", std::to_string(*envs));
    if (!out_dir.empty()) config.set("out_dir", out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return run_stage_status(stage, config, StageOptions{quiet});
}
