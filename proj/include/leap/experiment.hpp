#pragma once

/**
 * Experiment configuration, execution, and persistence: the engine's
 * user-facing layer. A RunConfig describes one experiment (dataset,
 * backend, path configuration, seeds); run_experiment executes it and
 * persists a replayable artifact:
 *
 *   <output_dir>/
 *     config.json                resolved snapshot; re-running it
 *                                reproduces the artifact byte-for-byte
 *     programs/ data/            copies of the scripted program file and
 *                                dataset the snapshot points at
 *     runs/SUB/problems/pNNNN_ID/repR/pathK.events.jsonl
 *     runs/.../pathK.txt       reconstructed transcript text
 *     prefixes/pool.json         harvested fixed beginnings (trap runs)
 *     report.json report.txt     metrics; plots/*.csv for x/y series
 *     manifest.json              engine version, timestamps, file list
 *
 * All randomness flows from the config seed. Config files are
 * declarative and versioned; CLI flags override file values.
 */

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "leap/backend.hpp"
#include "leap/dataset.hpp"
#include "leap/http_backend.hpp"
#include "leap/orchestrator.hpp"
#include "leap/report.hpp"

namespace leap {

enum class ExperimentKind {
  Run,
  Baseline,
  Trap,
  ErrorTolerance,
  SweepT,
  SweepK,
  SingleComm,
  SftFilter,
  Analyze,
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct BackendSettings {
  enum class Type { Scripted, Http };
  Type type = Type::Scripted;
  std::string program_file;  // scripted
  HttpBackendConfig http;    // http
  std::string api_key_env = "LEAP_API_KEY";
};

struct TrapSettings {
  double fraction = 0.15;    // leading share of each harvested response
  int continuations = 16;    // paths per prefix
  double temperature = 1.0;  // continuation sampling temperature
  int questions = 10;        // incorrect responses from distinct questions
  RunMode mode = RunMode::Independent;
};

struct ToleranceSettings {
  double fraction = 0.30;
  std::vector<int> good_counts = {0, 4, 8, 12, 16};
  int paths = 16;
  bool compare_independent = true;
};

struct SweepSettings {
  std::vector<std::size_t> interval_grid = {2048, 3072, 4096, 5120, 6144};
  std::vector<int> k_grid = {1, 2, 4, 8, 16};
};

std::vector<std::string> default_aha_keywords();

struct RunConfig {
  int version = 1;
  ExperimentKind kind = ExperimentKind::Run;
  std::filesystem::path dataset;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int repetitions = 1;
  int problem_parallelism = 1;
  BackendSettings backend;
  std::filesystem::path prompt_library_file;  // empty = embedded defaults
  LeapConfig leap;
  TrapSettings trap;
  ToleranceSettings tolerance;
  SweepSettings sweep;
  std::vector<std::string> aha_keywords = default_aha_keywords();
  std::filesystem::path input_artifact;     // sft_filter / analyze
  std::filesystem::path baseline_artifact;  // analyze: difficulty bucket source

  static RunConfig from_json_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  void validate() const;
};

struct RunArtifact {
  std::filesystem::path dir;
  RunConfig config;  // snapshot as persisted (paths point into the artifact)
  ExperimentReport report;
  bool any_problem_failed = false;
};

/// Instantiates the configured backend (scripted program file or remote
/// client with credentials resolved from the environment).
std::unique_ptr<TextBackend> make_backend(const BackendSettings& settings);

RunArtifact run_experiment(const RunConfig& config);

/// Writes report.json, report.txt, and plot-data files into the artifact
/// directory, then finalizes manifest.json.
void emit_report(const RunArtifact& artifact);

// ---- persisted-artifact access (analyze, sft-filter, replay checks) ----

struct StoredProblem {
  std::string id;
  std::vector<std::vector<Transcript>> reps;
  std::vector<bool> rep_failed;
};

struct StoredSubRun {
  std::string name;
  std::vector<StoredProblem> problems;
};

std::vector<StoredSubRun> load_artifact_runs(const std::filesystem::path& artifact_dir);
RunConfig load_artifact_config(const std::filesystem::path& artifact_dir);

}  // namespace leap
