/**
 * leap — experiment runner for peer-summary parallel reasoning.
 *
 * Subcommands: run, baseline, trap, tolerance, sweep, sft-filter,
 * analyze, report. Each accepts --config <file.json> plus flag overrides;
 * flags win over file values. Exit codes: 0 success, 1 partial failure,
 * 2 configuration error.
 */

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leap/errors.hpp"
#include "leap/experiment.hpp"
#include "leap/version.hpp"

namespace {

using leap::RunConfig;

struct CommonFlags {
  std::string config_file;
  std::string dataset;
  std::string out_dir;
  std::string backend_kind;  // "scripted" or "http"
  std::string program_file;
  std::string base_url;
  std::string model;
  std::string shape;
  std::string mode;
  std::string strategy;
  std::string prompt_library;
  std::uint64_t seed = 0;
  int reps = -1;
  int n_paths = -1;
  int k = -1;
  long interval = -1;
  long summary_budget = -1;
  long max_total = -1;
  long single_comm_position = -1;
  int max_rounds = -1;
  double temperature = -1.0;
  int parallelism = -1;
  int problem_parallelism = -1;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file (flags override it)");
  cmd->add_option("--dataset", f.dataset, "dataset file (JSONL: id, question, answer, kind)");
  cmd->add_option("--out", f.out_dir, "artifact output directory");
  cmd->add_option("--backend", f.backend_kind, "backend type: scripted or http");
  cmd->add_option("--program", f.program_file, "scripted backend program file");
  cmd->add_option("--base-url", f.base_url, "remote backend base URL");
  cmd->add_option("--model", f.model, "remote model name");
  cmd->add_option("--shape", f.shape, "remote request shape: completions or chat");
  cmd->add_option("--mode", f.mode, "run mode: leap, independent, single_communication");
  cmd->add_option("--strategy", f.strategy, "routing: dispersed, clustered, hybrid, random");
  cmd->add_option("--prompt-library", f.prompt_library, "prompt library JSON override");
  cmd->add_flag_callback("--version", [] {
    std::puts(leap::kEngineVersion);
    std::exit(0);
  });
  auto* seed_opt = cmd->add_option("--seed", f.seed, "run seed (all randomness flows from it)");
  seed_opt->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--reps", f.reps, "repetitions per problem");
  cmd->add_option("--paths", f.n_paths, "parallel reasoning paths N");
  cmd->add_option("--k", f.k, "peer summaries routed per path");
  cmd->add_option("--interval", f.interval, "tokens between exchange blocks (T)");
  cmd->add_option("--summary-budget", f.summary_budget, "summary token cap");
  cmd->add_option("--max-tokens", f.max_total, "per-path generation budget");
  cmd->add_option("--position", f.single_comm_position,
                  "single-communication block position (tokens)");
  cmd->add_option("--max-rounds", f.max_rounds, "cap on exchange rounds (0 = unlimited)");
  cmd->add_option("--temperature", f.temperature, "sampling temperature");
  cmd->add_option("--parallelism", f.parallelism, "concurrent paths per problem");
  cmd->add_option("--problem-parallelism", f.problem_parallelism, "concurrent problems");
}

RunConfig build_config(const CommonFlags& f, leap::ExperimentKind kind) {
  RunConfig config;
  if (!f.config_file.empty()) config = RunConfig::from_json_file(f.config_file);
  config.kind = kind;
  if (!f.dataset.empty()) config.dataset = f.dataset;
  if (!f.out_dir.empty()) config.output_dir = f.out_dir;
  if (f.seed_set) config.seed = f.seed;
  if (f.reps > 0) config.repetitions = f.reps;
  if (f.n_paths > 0) config.leap.n_paths = f.n_paths;
  if (f.k > 0) config.leap.strategy.k = f.k;
  if (f.interval > 0) config.leap.interval_tokens = static_cast<std::size_t>(f.interval);
  if (f.summary_budget > 0) {
    config.leap.summary_budget = static_cast<std::size_t>(f.summary_budget);
  }
  if (f.max_total > 0) {
    config.leap.generation.max_total_tokens = static_cast<std::size_t>(f.max_total);
  }
  if (f.single_comm_position > 0) {
    config.leap.single_comm_position = static_cast<std::size_t>(f.single_comm_position);
  }
  if (f.max_rounds >= 0) config.leap.max_rounds = f.max_rounds;
  if (f.temperature >= 0.0) config.leap.generation.temperature = f.temperature;
  if (f.parallelism > 0) config.leap.parallelism = f.parallelism;
  if (f.problem_parallelism > 0) config.problem_parallelism = f.problem_parallelism;
  if (!f.mode.empty()) config.leap.mode = leap::run_mode_from_string(f.mode);
  if (!f.strategy.empty()) {
    config.leap.strategy.kind = leap::routing_kind_from_string(f.strategy);
  }
  if (!f.prompt_library.empty()) config.prompt_library_file = f.prompt_library;
  if (!f.backend_kind.empty()) {
    config.backend.type = f.backend_kind == "http" ? leap::BackendSettings::Type::Http
                                                   : leap::BackendSettings::Type::Scripted;
  }
  if (!f.program_file.empty()) {
    config.backend.type = leap::BackendSettings::Type::Scripted;
    config.backend.program_file = f.program_file;
  }
  if (!f.base_url.empty()) {
    config.backend.type = leap::BackendSettings::Type::Http;
    config.backend.http.base_url = f.base_url;
  }
  if (!f.model.empty()) config.backend.http.model = f.model;
  if (!f.shape.empty()) {
    config.backend.http.shape = f.shape == "chat"
                                    ? leap::HttpBackendConfig::RequestShape::Chat
                                    : leap::HttpBackendConfig::RequestShape::Completions;
  }
  return config;
}

int execute(const RunConfig& config) {
  const auto artifact = leap::run_experiment(config);
  std::cout << "artifact: " << artifact.dir.string() << "\n";
  for (const auto& sub : artifact.report.subruns) {
    std::cout << "  [" << sub.name << "] pass@1=" << sub.pass_at_1
              << " cons=" << sub.cons_rate << "\n";
  }
  if (artifact.report.trap) {
    std::cout << "  mean gap P_G = " << artifact.report.trap->mean_gap << "\n";
  }
  return artifact.any_problem_failed ? 1 : 0;
}

int merge_reports(const std::vector<std::string>& artifacts) {
  // Per-benchmark rows plus an unweighted mean across artifacts.
  double pass_sum = 0.0, cons_sum = 0.0;
  int counted = 0;
  std::printf("%-40s  %-10s  %-10s\n", "artifact", "pass@1", "cons@N");
  for (const auto& dir : artifacts) {
    std::ifstream text(std::filesystem::path(dir) / "report.json");
    if (!text) throw leap::ConfigError("no report.json in " + dir);
    nlohmann::json j;
    text >> j;
    double pass = 0.0, cons = 0.0;
    if (j.contains("subruns") && !j["subruns"].empty()) {
      pass = j["subruns"][0].value("pass_at_1", 0.0);
      cons = j["subruns"][0].value("cons_rate", 0.0);
    }
    std::printf("%-40s  %-10.4f  %-10.4f\n", dir.c_str(), pass, cons);
    pass_sum += pass;
    cons_sum += cons;
    ++counted;
  }
  if (counted > 1) {
    std::printf("%-40s  %-10.4f  %-10.4f\n", "unweighted mean", pass_sum / counted,
                cons_sum / counted);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"peer-summary parallel reasoning experiment runner"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string sweep_param = "T";
  std::string grid_csv;
  double fraction = -1.0;
  int continuations = -1;
  double trap_temperature = -1.0;
  int questions = -1;
  std::string trap_mode;
  std::string good_counts_csv;
  int tolerance_paths = -1;
  std::string input_artifact, baseline_artifact;
  std::vector<std::string> report_artifacts;

  auto* run_cmd = app.add_subcommand("run", "peer-exchange run over a dataset");
  add_common(run_cmd, flags);
  auto* baseline_cmd = app.add_subcommand("baseline", "independent parallel baseline");
  add_common(baseline_cmd, flags);
  auto* trap_cmd =
      app.add_subcommand("trap", "fixed-beginning pipeline: harvest prefixes, continue, report gap");
  add_common(trap_cmd, flags);
  trap_cmd->add_option("--fraction", fraction, "leading share of harvested responses");
  trap_cmd->add_option("--continuations", continuations, "continuations per prefix");
  trap_cmd->add_option("--trap-temperature", trap_temperature, "continuation temperature");
  trap_cmd->add_option("--questions", questions, "distinct questions to harvest");
  trap_cmd->add_option("--trap-mode", trap_mode, "continuation mode: independent or leap");
  auto* tolerance_cmd =
      app.add_subcommand("tolerance", "mixed good/bad beginnings across paths");
  add_common(tolerance_cmd, flags);
  tolerance_cmd->add_option("--fraction", fraction, "leading share of harvested responses");
  tolerance_cmd->add_option("--good-counts", good_counts_csv, "comma list of good-path counts");
  tolerance_cmd->add_option("--tolerance-paths", tolerance_paths, "paths per mixed run");
  auto* sweep_cmd = app.add_subcommand("sweep", "grid sweep over T or k");
  add_common(sweep_cmd, flags);
  sweep_cmd->add_option("--param", sweep_param, "swept parameter: T or k");
  sweep_cmd->add_option("--grid", grid_csv, "comma-separated grid values");
  auto* sft_cmd = app.add_subcommand("sft-filter", "filter fine-tuning candidates from an artifact");
  add_common(sft_cmd, flags);
  sft_cmd->add_option("--artifact", input_artifact, "input artifact directory")->required();
  auto* analyze_cmd = app.add_subcommand("analyze", "recompute metrics from an artifact");
  add_common(analyze_cmd, flags);
  analyze_cmd->add_option("--artifact", input_artifact, "input artifact directory")->required();
  analyze_cmd->add_option("--baseline-artifact", baseline_artifact,
                          "32-path baseline artifact for difficulty buckets");
  auto* report_cmd = app.add_subcommand("report", "print merged per-benchmark tables");
  report_cmd->add_option("--artifact", report_artifacts, "artifact directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return execute(build_config(flags, leap::ExperimentKind::Run));
    if (baseline_cmd->parsed()) {
      return execute(build_config(flags, leap::ExperimentKind::Baseline));
    }
    if (trap_cmd->parsed()) {
      auto config = build_config(flags, leap::ExperimentKind::Trap);
      if (fraction > 0) config.trap.fraction = fraction;
      if (continuations > 0) config.trap.continuations = continuations;
      if (trap_temperature >= 0) config.trap.temperature = trap_temperature;
      if (questions > 0) config.trap.questions = questions;
      if (!trap_mode.empty()) config.trap.mode = leap::run_mode_from_string(trap_mode);
      return execute(config);
    }
    if (tolerance_cmd->parsed()) {
      auto config = build_config(flags, leap::ExperimentKind::ErrorTolerance);
      if (fraction > 0) config.tolerance.fraction = fraction;
      if (tolerance_paths > 0) config.tolerance.paths = tolerance_paths;
      if (!good_counts_csv.empty()) {
        config.tolerance.good_counts.clear();
        std::stringstream ss(good_counts_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
          config.tolerance.good_counts.push_back(std::stoi(item));
        }
      }
      return execute(config);
    }
    if (sweep_cmd->parsed()) {
      auto config = build_config(flags, sweep_param == "k" ? leap::ExperimentKind::SweepK
                                                           : leap::ExperimentKind::SweepT);
      if (!grid_csv.empty()) {
        std::vector<std::size_t> grid;
        std::stringstream ss(grid_csv);
        std::string item;
        while (std::getline(ss, item, ',')) grid.push_back(std::stoul(item));
        if (sweep_param == "k") {
          config.sweep.k_grid.assign(grid.begin(), grid.end());
        } else {
          config.sweep.interval_grid = grid;
        }
      }
      return execute(config);
    }
    if (sft_cmd->parsed()) {
      auto config = build_config(flags, leap::ExperimentKind::SftFilter);
      config.input_artifact = input_artifact;
      return execute(config);
    }
    if (analyze_cmd->parsed()) {
      auto config = build_config(flags, leap::ExperimentKind::Analyze);
      config.input_artifact = input_artifact;
      if (!baseline_artifact.empty()) config.baseline_artifact = baseline_artifact;
      return execute(config);
    }
    if (report_cmd->parsed()) return merge_reports(report_artifacts);
  } catch (const leap::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
