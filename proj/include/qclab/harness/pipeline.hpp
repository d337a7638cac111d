#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "qclab/harness/config.hpp"

namespace qclab::harness {

enum class Stage { GenDataset, TrainEstimator, TrainTeacher, Distill, Eval, DumpLatents };

std::string_view stage_name(Stage s);
// Throws ConfigError for unknown names.
Stage stage_from_name(std::string_view name);

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitMissingPrerequisite = 2,
  kExitBadCheckpoint = 3,
  kExitNonFinite = 4,
};

struct PrerequisiteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifact file names inside the output directory.
namespace artifact {
inline constexpr const char* kDataset = "dataset.qcds";
inline constexpr const char* kEstimator = "estimator.ckpt";
inline constexpr const char* kEstimatorMetrics = "estimator_metrics.csv";
inline constexpr const char* kTeacher = "teacher.ckpt";
inline constexpr const char* kTeacherState = "teacher_state.ckpt";
inline constexpr const char* kTeacherMetrics = "teacher_metrics.csv";
inline constexpr const char* kStudent = "student.ckpt";
inline constexpr const char* kDistillState = "distill_state.ckpt";
inline constexpr const char* kDistillMetrics = "distill_metrics.csv";
inline constexpr const char* kEval = "eval.csv";
inline constexpr const char* kLatents = "latents.csv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

struct StageOptions {
  bool quiet = false;
};

// Runs one stage with artifacts under config.out_dir. Throws ConfigError,
// PrerequisiteError, nn::CheckpointError or NonFiniteError on failure.
void run_stage(Stage stage, const ExperimentConfig& config, const StageOptions& options = {});

// run_stage with the exceptions mapped to exit codes and a one-line
// diagnostic on stderr.
int run_stage_status(Stage stage, const ExperimentConfig& config, const StageOptions& options = {});

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qclab::harness
