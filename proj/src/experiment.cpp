#include "leap/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "leap/errors.hpp"
#include "leap/evaluation.hpp"
#include "leap/scripted_backend.hpp"
#include "leap/seeding.hpp"
#include "leap/version.hpp"

namespace leap {

using nlohmann::json;
namespace fs = std::filesystem;

// ============================================================================
// Config serialization
// ============================================================================

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::Baseline: return "baseline";
    case ExperimentKind::Trap: return "trap";
    case ExperimentKind::ErrorTolerance: return "error_tolerance";
    case ExperimentKind::SweepT: return "sweep_T";
    case ExperimentKind::SweepK: return "sweep_k";
    case ExperimentKind::SingleComm: return "single_comm";
    case ExperimentKind::SftFilter: return "sft_filter";
    case ExperimentKind::Analyze: return "analyze";
  }
  return "run";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  static const std::map<std::string, ExperimentKind> kinds = {
      {"run", ExperimentKind::Run},
      {"baseline", ExperimentKind::Baseline},
      {"trap", ExperimentKind::Trap},
      {"error_tolerance", ExperimentKind::ErrorTolerance},
      {"tolerance", ExperimentKind::ErrorTolerance},
      {"sweep_T", ExperimentKind::SweepT},
      {"sweep_k", ExperimentKind::SweepK},
      {"single_comm", ExperimentKind::SingleComm},
      {"sft_filter", ExperimentKind::SftFilter},
      {"analyze", ExperimentKind::Analyze},
  };
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw ConfigError("unknown experiment kind: " + name);
  return it->second;
}

std::vector<std::string> default_aha_keywords() {
  // Configurable reflection markers; the shipped list is a pragmatic
  // default, not a fidelity claim (see configs/aha_keywords.json).
  return {"wait", "aha", "hmm", "alternatively", "let me double-check", "let me re-examine",
          "let me recheck", "on second thought", "rethink"};
}

namespace {

json generation_to_json(const GenerationConfig& g) {
  json j = {{"temperature", g.temperature},
            {"top_p", g.top_p},
            {"max_total_tokens", g.max_total_tokens},
            {"stop_sequences", g.stop_sequences}};
  if (g.top_k) j["top_k"] = *g.top_k;
  if (g.seed) j["seed"] = *g.seed;
  return j;
}

GenerationConfig generation_from_json(const json& j) {
  GenerationConfig g;
  g.temperature = j.value("temperature", g.temperature);
  g.top_p = j.value("top_p", g.top_p);
  if (j.contains("top_k")) g.top_k = j["top_k"].get<int>();
  g.max_total_tokens = j.value("max_total_tokens", g.max_total_tokens);
  if (j.contains("stop_sequences")) {
    g.stop_sequences = j["stop_sequences"].get<std::vector<std::string>>();
  }
  if (j.contains("seed")) g.seed = j["seed"].get<std::uint64_t>();
  return g;
}

json leap_to_json(const LeapConfig& c) {
  json prefixes = json::object();
  for (const auto& [id, prefix] : c.prefix_assignment) {
    prefixes[std::to_string(id)] = prefix;
  }
  return {{"n_paths", c.n_paths},
          {"interval_tokens", c.interval_tokens},
          {"summary_budget", c.summary_budget},
          {"mode", to_string(c.mode)},
          {"single_comm_position", c.single_comm_position},
          {"max_rounds", c.max_rounds},
          {"strategy",
           {{"kind", to_string(c.strategy.kind)}, {"k", c.strategy.k}, {"seed", c.strategy.seed}}},
          {"generation", generation_to_json(c.generation)},
          {"parallelism", c.parallelism},
          {"round_timeout_ms", c.round_timeout_ms},
          {"prefix_assignment", prefixes}};
}

LeapConfig leap_from_json(const json& j) {
  LeapConfig c;
  c.n_paths = j.value("n_paths", c.n_paths);
  c.interval_tokens = j.value("interval_tokens", c.interval_tokens);
  c.summary_budget = j.value("summary_budget", c.summary_budget);
  if (j.contains("mode")) c.mode = run_mode_from_string(j["mode"]);
  c.single_comm_position = j.value("single_comm_position", c.single_comm_position);
  c.max_rounds = j.value("max_rounds", c.max_rounds);
  if (j.contains("strategy")) {
    const auto& s = j["strategy"];
    if (s.contains("kind")) c.strategy.kind = routing_kind_from_string(s["kind"]);
    c.strategy.k = s.value("k", c.strategy.k);
    c.strategy.seed = s.value("seed", c.strategy.seed);
  }
  if (j.contains("generation")) c.generation = generation_from_json(j["generation"]);
  c.parallelism = j.value("parallelism", c.parallelism);
  c.round_timeout_ms = j.value("round_timeout_ms", c.round_timeout_ms);
  if (j.contains("prefix_assignment")) {
    for (const auto& [key, value] : j["prefix_assignment"].items()) {
      c.prefix_assignment[std::stoi(key)] = value.get<std::string>();
    }
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json backend;
  if (c.backend.type == BackendSettings::Type::Scripted) {
    backend = {{"type", "scripted"}, {"program_file", c.backend.program_file}};
  } else {
    backend = {{"type", "http"},
               {"base_url", c.backend.http.base_url},
               {"model", c.backend.http.model},
               {"shape",
                c.backend.http.shape == HttpBackendConfig::RequestShape::Completions
                    ? "completions"
                    : "chat"},
               {"max_in_flight", c.backend.http.max_in_flight},
               {"max_attempts", c.backend.http.max_attempts},
               {"initial_backoff_ms", c.backend.http.initial_backoff_ms},
               {"chars_per_token", c.backend.http.chars_per_token},
               {"api_key_env", c.backend.api_key_env}};
  }
  return {{"version", c.version},
          {"kind", to_string(c.kind)},
          {"dataset", c.dataset.string()},
          {"output_dir", c.output_dir.string()},
          {"seed", c.seed},
          {"repetitions", c.repetitions},
          {"problem_parallelism", c.problem_parallelism},
          {"backend", backend},
          {"prompt_library_file", c.prompt_library_file.string()},
          {"leap", leap_to_json(c.leap)},
          {"trap",
           {{"fraction", c.trap.fraction},
            {"continuations", c.trap.continuations},
            {"temperature", c.trap.temperature},
            {"questions", c.trap.questions},
            {"mode", to_string(c.trap.mode)}}},
          {"tolerance",
           {{"fraction", c.tolerance.fraction},
            {"good_counts", c.tolerance.good_counts},
            {"paths", c.tolerance.paths},
            {"compare_independent", c.tolerance.compare_independent}}},
          {"sweep",
           {{"interval_grid", c.sweep.interval_grid}, {"k_grid", c.sweep.k_grid}}},
          {"aha_keywords", c.aha_keywords},
          {"input_artifact", c.input_artifact.string()},
          {"baseline_artifact", c.baseline_artifact.string()}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.version = j.value("version", 1);
  if (c.version != 1) {
    throw ConfigError("unsupported config version: " + std::to_string(c.version));
  }
  if (j.contains("kind")) c.kind = experiment_kind_from_string(j["kind"]);
  c.dataset = j.value("dataset", std::string{});
  c.output_dir = j.value("output_dir", std::string{});
  c.seed = j.value("seed", std::uint64_t{0});
  c.repetitions = j.value("repetitions", 1);
  c.problem_parallelism = j.value("problem_parallelism", 1);
  if (j.contains("backend")) {
    const auto& b = j["backend"];
    const std::string type = b.value("type", "scripted");
    if (type == "scripted") {
      c.backend.type = BackendSettings::Type::Scripted;
      c.backend.program_file = b.value("program_file", std::string{});
    } else if (type == "http") {
      c.backend.type = BackendSettings::Type::Http;
      c.backend.http.base_url = b.value("base_url", c.backend.http.base_url);
      c.backend.http.model = b.value("model", c.backend.http.model);
      c.backend.http.shape = b.value("shape", std::string("completions")) == "chat"
                                 ? HttpBackendConfig::RequestShape::Chat
                                 : HttpBackendConfig::RequestShape::Completions;
      c.backend.http.max_in_flight = b.value("max_in_flight", c.backend.http.max_in_flight);
      c.backend.http.max_attempts = b.value("max_attempts", c.backend.http.max_attempts);
      c.backend.http.initial_backoff_ms =
          b.value("initial_backoff_ms", c.backend.http.initial_backoff_ms);
      c.backend.http.chars_per_token =
          b.value("chars_per_token", c.backend.http.chars_per_token);
      c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
    } else {
      throw ConfigError("unknown backend type: " + type);
    }
  }
  c.prompt_library_file = j.value("prompt_library_file", std::string{});
  if (j.contains("leap")) c.leap = leap_from_json(j["leap"]);
  if (j.contains("trap")) {
    const auto& t = j["trap"];
    c.trap.fraction = t.value("fraction", c.trap.fraction);
    c.trap.continuations = t.value("continuations", c.trap.continuations);
    c.trap.temperature = t.value("temperature", c.trap.temperature);
    c.trap.questions = t.value("questions", c.trap.questions);
    if (t.contains("mode")) c.trap.mode = run_mode_from_string(t["mode"]);
  }
  if (j.contains("tolerance")) {
    const auto& t = j["tolerance"];
    c.tolerance.fraction = t.value("fraction", c.tolerance.fraction);
    if (t.contains("good_counts")) {
      c.tolerance.good_counts = t["good_counts"].get<std::vector<int>>();
    }
    c.tolerance.paths = t.value("paths", c.tolerance.paths);
    c.tolerance.compare_independent =
        t.value("compare_independent", c.tolerance.compare_independent);
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (s.contains("interval_grid")) {
      c.sweep.interval_grid = s["interval_grid"].get<std::vector<std::size_t>>();
    }
    if (s.contains("k_grid")) c.sweep.k_grid = s["k_grid"].get<std::vector<int>>();
  }
  if (j.contains("aha_keywords")) {
    c.aha_keywords = j["aha_keywords"].get<std::vector<std::string>>();
  }
  c.input_artifact = j.value("input_artifact", std::string{});
  c.baseline_artifact = j.value("baseline_artifact", std::string{});
  return c;
}

}  // namespace

RunConfig RunConfig::from_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string RunConfig::to_json_text() const { return config_to_json(*this).dump(2) + "\n"; }

void RunConfig::validate() const {
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (problem_parallelism < 1) throw ConfigError("problem_parallelism must be >= 1");
  const bool artifact_based = kind == ExperimentKind::SftFilter || kind == ExperimentKind::Analyze;
  if (artifact_based) {
    if (input_artifact.empty()) {
      throw ConfigError(std::string(to_string(kind)) + " requires input_artifact");
    }
    return;
  }
  if (dataset.empty()) throw ConfigError("dataset is required");
  if (!fs::exists(dataset)) throw ConfigError("dataset does not exist: " + dataset.string());
  if (backend.type == BackendSettings::Type::Scripted) {
    if (backend.program_file.empty()) {
      throw ConfigError("scripted backend requires program_file");
    }
    if (!fs::exists(backend.program_file)) {
      throw ConfigError("program file does not exist: " + backend.program_file);
    }
  }
  if (!prompt_library_file.empty() && !fs::exists(prompt_library_file)) {
    throw ConfigError("prompt library does not exist: " + prompt_library_file.string());
  }
  if (kind == ExperimentKind::Trap) {
    if (trap.fraction <= 0.0 || trap.fraction >= 1.0) {
      throw ConfigError("trap fraction must be in (0,1)");
    }
    if (trap.continuations < 1) throw ConfigError("trap continuations must be >= 1");
    if (trap.questions < 1) throw ConfigError("trap questions must be >= 1");
  }
  if (kind == ExperimentKind::ErrorTolerance) {
    if (tolerance.fraction <= 0.0 || tolerance.fraction >= 1.0) {
      throw ConfigError("tolerance fraction must be in (0,1)");
    }
    if (tolerance.paths < 2) throw ConfigError("tolerance paths must be >= 2");
    for (int g : tolerance.good_counts) {
      if (g < 0 || g > tolerance.paths) {
        throw ConfigError("tolerance good_count out of range: " + std::to_string(g));
      }
    }
  }
  if (kind == ExperimentKind::SweepT && sweep.interval_grid.empty()) {
    throw ConfigError("sweep_T requires a non-empty interval grid");
  }
  if (kind == ExperimentKind::SweepK && sweep.k_grid.empty()) {
    throw ConfigError("sweep_k requires a non-empty k grid");
  }
}

// ============================================================================
// Small helpers
// ============================================================================

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::string_view s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  for (const char c : id) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  }
  return out.empty() ? "problem" : out;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// In-memory results of one sub-run, aligned with the dataset order.
struct ProblemRuns {
  ProblemRecord record;
  std::vector<std::vector<Transcript>> reps;
  std::vector<bool> rep_failed;
};

struct SubRunData {
  std::string name;
  std::vector<ProblemRuns> problems;
};

void persist_subrun(const fs::path& artifact_dir, const SubRunData& data) {
  const fs::path base = artifact_dir / "runs" / data.name / "problems";
  for (std::size_t pi = 0; pi < data.problems.size(); ++pi) {
    const auto& problem = data.problems[pi];
    char idx[16];
    std::snprintf(idx, sizeof(idx), "p%04zu_", pi);
    const fs::path pdir = base / (idx + sanitize_id(problem.record.id));
    const json meta = {{"id", problem.record.id}};
    write_file(pdir / "problem.json", meta.dump() + "\n");
    for (std::size_t r = 0; r < problem.reps.size(); ++r) {
      const fs::path rdir = pdir / ("rep" + std::to_string(r));
      fs::create_directories(rdir);
      if (problem.rep_failed[r]) write_file(rdir / "rep.failed", "all paths failed\n");
      for (const auto& t : problem.reps[r]) {
        std::ostringstream events;
        write_events_jsonl(t, events);
        write_file(rdir / ("path" + std::to_string(t.path_id) + ".events.jsonl"),
                   events.str());
        write_file(rdir / ("path" + std::to_string(t.path_id) + ".txt"), t.final_context());
      }
    }
  }
}

/// Bounded worker pool over problem indices; results land in caller state
/// under the jobs' own locking (each job owns a distinct slot).
void for_each_parallel(std::size_t count, int parallelism,
                       const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(parallelism, 1), count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::mutex error_mu;
  std::exception_ptr first_error;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct Executor {
  const RunConfig& config;
  TextBackend& backend;
  const PromptLibrary& library;

  /// Runs every problem of `records` under `leap_cfg` with the configured
  /// repetition count; failures are recorded per repetition and execution
  /// continues.
  SubRunData run_dataset(const std::string& name, const std::vector<ProblemRecord>& records,
                         const LeapConfig& leap_cfg, std::uint64_t sub_seed,
                         int repetitions) const {
    SubRunData data;
    data.name = name;
    data.problems.resize(records.size());
    const Orchestrator orchestrator(backend, library);

    for_each_parallel(records.size(), config.problem_parallelism, [&](std::size_t pi) {
      ProblemRuns runs;
      runs.record = records[pi];
      for (int r = 0; r < repetitions; ++r) {
        const std::uint64_t seed =
            mix_seed(sub_seed, static_cast<std::uint64_t>(pi), static_cast<std::uint64_t>(r));
        try {
          runs.reps.push_back(orchestrator.run_problem(runs.record.question, runs.record.kind,
                                                       leap_cfg, seed));
          runs.rep_failed.push_back(false);
        } catch (AllPathsFailed& e) {
          runs.reps.push_back(std::move(e.transcripts));
          runs.rep_failed.push_back(true);
        }
      }
      data.problems[pi] = std::move(runs);
    });
    return data;
  }
};

std::vector<bool> correctness_of(const ProblemRuns& runs, std::size_t rep) {
  std::vector<bool> out;
  const std::string gold = normalize_answer(runs.record.gold_answer, runs.record.kind);
  for (const auto& t : runs.reps[rep]) {
    const auto answer = extract_answer(t.response_text(), runs.record.kind);
    out.push_back(answer.found && answer.normalized == gold);
  }
  return out;
}

ProblemEval evaluate(const ProblemRuns& runs, const std::vector<std::string>& aha_keywords) {
  return evaluate_problem(runs.record, runs.reps, runs.rep_failed, aha_keywords);
}

SubRunReport report_subrun(const SubRunData& data, const std::vector<std::string>& aha_keywords,
                           bool* any_failed) {
  std::vector<ProblemEval> evals;
  evals.reserve(data.problems.size());
  for (const auto& p : data.problems) {
    auto eval = evaluate(p, aha_keywords);
    if (eval.failed && any_failed) *any_failed = true;
    evals.push_back(std::move(eval));
  }
  return aggregate_subrun(data.name, std::move(evals));
}

}  // namespace

std::unique_ptr<TextBackend> make_backend(const BackendSettings& settings) {
  if (settings.type == BackendSettings::Type::Scripted) {
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(settings.program_file));
  }
  HttpBackendConfig http = settings.http;
  if (http.api_key.empty() && !settings.api_key_env.empty()) {
    if (const char* key = std::getenv(settings.api_key_env.c_str())) http.api_key = key;
  }
  return std::make_unique<HttpBackend>(http);
}

// ============================================================================
// Experiment kinds
// ============================================================================

namespace {

struct TrapExecution {
  TrapSummary summary;
  SubRunData baseline;
  SubRunData continuations;
  json prefix_pool = json::array();
};

TrapExecution run_trap(const RunConfig& config, const std::vector<ProblemRecord>& records,
                       const Executor& executor) {
  TrapExecution out;
  out.summary.requested_questions = config.trap.questions;

  LeapConfig base_cfg = config.leap;
  base_cfg.mode = RunMode::Independent;
  base_cfg.prefix_assignment.clear();
  out.baseline = executor.run_dataset("baseline", records, base_cfg,
                                      mix_seed(config.seed, 101), /*repetitions=*/1);

  // Qualifying problems contain both correct and incorrect responses.
  std::vector<std::size_t> qualifying;
  for (std::size_t pi = 0; pi < records.size(); ++pi) {
    if (out.baseline.problems[pi].rep_failed[0]) continue;
    const auto correct = correctness_of(out.baseline.problems[pi], 0);
    const bool any_good = std::count(correct.begin(), correct.end(), true) > 0;
    const bool any_bad = std::count(correct.begin(), correct.end(), false) > 0;
    if (any_good && any_bad) qualifying.push_back(pi);
  }

  // One incorrect response from each of up to `questions` distinct
  // problems, chosen deterministically from the run seed.
  SplitMix64 chooser{mix_seed(config.seed, 202)};
  std::vector<std::size_t> selected = qualifying;
  for (std::size_t i = 0; i + 1 < selected.size(); ++i) {
    const std::size_t j = i + chooser.below(selected.size() - i);
    std::swap(selected[i], selected[j]);
  }
  if (selected.size() > static_cast<std::size_t>(config.trap.questions)) {
    selected.resize(config.trap.questions);
  }
  std::sort(selected.begin(), selected.end());

  std::vector<ProblemRecord> continuation_records;
  std::vector<std::string> continuation_prefixes;
  std::vector<std::size_t> continuation_sources;  // dataset index per entry
  for (const std::size_t pi : selected) {
    const auto& problem = out.baseline.problems[pi];
    const auto prefixes =
        harvest_prefixes(problem.reps[0], problem.record.gold_answer, problem.record.kind,
                         config.trap.fraction, Polarity::Bad, executor.backend);
    if (prefixes.empty()) continue;
    SplitMix64 pick{mix_seed(config.seed, static_cast<std::uint64_t>(pi), 303)};
    const std::string& prefix = prefixes[pick.below(prefixes.size())];
    out.prefix_pool.push_back({{"problem_id", problem.record.id},
                               {"polarity", "bad"},
                               {"fraction", config.trap.fraction},
                               {"hash", hash_hex(prefix)},
                               {"tokens", executor.backend.count_tokens(prefix)},
                               {"text", prefix}});

    ProblemRecord cont = problem.record;
    cont.id = problem.record.id + "__" + hash_hex(prefix).substr(0, 8);
    continuation_records.push_back(cont);
    continuation_prefixes.push_back(prefix);
    continuation_sources.push_back(pi);
  }
  out.summary.used_questions = static_cast<int>(continuation_records.size());

  // Continuations: every path restarts from the same fixed beginning.
  out.continuations.name = "continuations";
  out.continuations.problems.resize(continuation_records.size());
  for (std::size_t ci = 0; ci < continuation_records.size(); ++ci) {
    LeapConfig cont_cfg = config.leap;
    cont_cfg.mode = config.trap.mode;
    cont_cfg.n_paths = config.trap.continuations;
    cont_cfg.generation.temperature = config.trap.temperature;
    cont_cfg.prefix_assignment.clear();
    for (int p = 0; p < cont_cfg.n_paths; ++p) {
      cont_cfg.prefix_assignment[p] = continuation_prefixes[ci];
    }
    const std::vector<ProblemRecord> one = {continuation_records[ci]};
    auto sub = executor.run_dataset("continuations", one, cont_cfg,
                                    mix_seed(config.seed, static_cast<std::uint64_t>(ci), 404),
                                    /*repetitions=*/1);
    out.continuations.problems[ci] = std::move(sub.problems[0]);
  }

  // Gap per problem: unconstrained accuracy minus prefixed accuracy.
  for (std::size_t ci = 0; ci < out.continuations.problems.size(); ++ci) {
    const std::size_t pi = continuation_sources[ci];
    const auto& cont_problem = out.continuations.problems[ci];

    TrapProblemRow row;
    row.problem_id = records[pi].id;
    row.prefixes_used = 1;
    row.unconstrained_acc = pass_at_1(correctness_of(out.baseline.problems[pi], 0));
    row.constrained_acc = cont_problem.rep_failed[0]
                              ? 0.0
                              : pass_at_1(correctness_of(cont_problem, 0));
    row.gap = accuracy_gap(row.constrained_acc, row.unconstrained_acc);
    out.summary.problems.push_back(row);
  }
  double gap_sum = 0.0;
  for (const auto& row : out.summary.problems) gap_sum += row.gap;
  out.summary.mean_gap =
      out.summary.problems.empty() ? 0.0 : gap_sum / out.summary.problems.size();
  return out;
}

struct ToleranceExecution {
  std::vector<ToleranceRow> rows;
  SubRunData baseline;
  std::vector<SubRunData> mixes;
};

ToleranceExecution run_tolerance(const RunConfig& config,
                                 const std::vector<ProblemRecord>& records,
                                 const Executor& executor) {
  ToleranceExecution out;

  LeapConfig base_cfg = config.leap;
  base_cfg.mode = RunMode::Independent;
  base_cfg.prefix_assignment.clear();
  out.baseline = executor.run_dataset("baseline", records, base_cfg,
                                      mix_seed(config.seed, 505), /*repetitions=*/1);

  struct Pools {
    std::size_t problem_index;
    std::vector<std::string> good;
    std::vector<std::string> bad;
  };
  std::vector<Pools> pools;
  for (std::size_t pi = 0; pi < records.size(); ++pi) {
    const auto& problem = out.baseline.problems[pi];
    if (problem.rep_failed[0]) continue;
    Pools p;
    p.problem_index = pi;
    p.good = harvest_prefixes(problem.reps[0], problem.record.gold_answer, problem.record.kind,
                              config.tolerance.fraction, Polarity::Good, executor.backend);
    p.bad = harvest_prefixes(problem.reps[0], problem.record.gold_answer, problem.record.kind,
                             config.tolerance.fraction, Polarity::Bad, executor.backend);
    if (!p.good.empty() && !p.bad.empty()) pools.push_back(std::move(p));
  }

  std::vector<RunMode> modes = {RunMode::Leap};
  if (config.tolerance.compare_independent) modes.push_back(RunMode::Independent);

  for (const int good_count : config.tolerance.good_counts) {
    for (const RunMode mode : modes) {
      SubRunData mix;
      mix.name = "g" + std::to_string(good_count) + "_" + to_string(mode);
      double pass_sum = 0.0;
      std::size_t counted = 0;
      for (const auto& p : pools) {
        LeapConfig cfg = config.leap;
        cfg.mode = mode;
        cfg.n_paths = config.tolerance.paths;
        cfg.prefix_assignment.clear();
        for (int path = 0; path < cfg.n_paths; ++path) {
          if (path < good_count) {
            cfg.prefix_assignment[path] = p.good[path % p.good.size()];
          } else {
            cfg.prefix_assignment[path] = p.bad[(path - good_count) % p.bad.size()];
          }
        }
        const std::vector<ProblemRecord> one = {records[p.problem_index]};
        auto sub = executor.run_dataset(
            mix.name, one, cfg,
            mix_seed(config.seed, static_cast<std::uint64_t>(good_count),
                     static_cast<std::uint64_t>(p.problem_index)),
            /*repetitions=*/1);
        if (!sub.problems[0].rep_failed[0]) {
          pass_sum += pass_at_1(correctness_of(sub.problems[0], 0));
          ++counted;
        }
        mix.problems.push_back(std::move(sub.problems[0]));
      }
      ToleranceRow row;
      row.good_count = good_count;
      row.mode = to_string(mode);
      row.pass_at_1 = counted == 0 ? 0.0 : pass_sum / static_cast<double>(counted);
      out.rows.push_back(row);
      out.mixes.push_back(std::move(mix));
    }
  }
  return out;
}

std::map<std::string, int> baseline_correct_counts(const fs::path& artifact_dir) {
  const RunConfig stored = load_artifact_config(artifact_dir);
  const auto records = load_dataset(stored.dataset);
  std::map<std::string, ProblemRecord> by_id;
  for (const auto& r : records) by_id[r.id] = r;

  const auto runs = load_artifact_runs(artifact_dir);
  std::map<std::string, int> counts;
  for (const auto& sub : runs) {
    if (sub.name != "main" && sub.name != "baseline") continue;
    for (const auto& problem : sub.problems) {
      const auto rec = by_id.find(problem.id);
      if (rec == by_id.end() || problem.reps.empty()) continue;
      if (problem.reps[0].size() != 32) {
        throw ConfigError("difficulty bucketing requires a 32-path baseline run; got " +
                          std::to_string(problem.reps[0].size()));
      }
      const std::string gold =
          normalize_answer(rec->second.gold_answer, rec->second.kind);
      int correct = 0;
      for (const auto& t : problem.reps[0]) {
        const auto answer = extract_answer(t.response_text(), rec->second.kind);
        if (answer.found && answer.normalized == gold) ++correct;
      }
      counts[problem.id] = correct;
    }
  }
  return counts;
}

}  // namespace

// ============================================================================
// Artifact persistence and loading
// ============================================================================

std::vector<StoredSubRun> load_artifact_runs(const fs::path& artifact_dir) {
  const fs::path runs_dir = artifact_dir / "runs";
  if (!fs::exists(runs_dir)) throw ConfigError("artifact has no runs/: " + artifact_dir.string());

  std::vector<StoredSubRun> out;
  std::vector<fs::path> sub_dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory()) sub_dirs.push_back(entry.path());
  }
  std::sort(sub_dirs.begin(), sub_dirs.end());

  for (const auto& sub_dir : sub_dirs) {
    StoredSubRun sub;
    sub.name = sub_dir.filename().string();
    const fs::path problems_dir = sub_dir / "problems";
    if (!fs::exists(problems_dir)) continue;
    std::vector<fs::path> problem_dirs;
    for (const auto& entry : fs::directory_iterator(problems_dir)) {
      if (entry.is_directory()) problem_dirs.push_back(entry.path());
    }
    std::sort(problem_dirs.begin(), problem_dirs.end());

    for (const auto& pdir : problem_dirs) {
      StoredProblem problem;
      const fs::path meta_path = pdir / "problem.json";
      if (fs::exists(meta_path)) {
        problem.id = json::parse(read_file(meta_path)).at("id").get<std::string>();
      } else {
        const std::string dir_name = pdir.filename().string();
        const auto underscore = dir_name.find('_');
        problem.id =
            underscore == std::string::npos ? dir_name : dir_name.substr(underscore + 1);
      }

      std::vector<fs::path> rep_dirs;
      for (const auto& entry : fs::directory_iterator(pdir)) {
        if (entry.is_directory()) rep_dirs.push_back(entry.path());
      }
      std::sort(rep_dirs.begin(), rep_dirs.end());
      for (const auto& rdir : rep_dirs) {
        std::vector<fs::path> logs;
        for (const auto& entry : fs::directory_iterator(rdir)) {
          const std::string name = entry.path().filename().string();
          if (name.rfind("path", 0) == 0 && name.find(".events.jsonl") != std::string::npos) {
            logs.push_back(entry.path());
          }
        }
        std::sort(logs.begin(), logs.end(), [](const fs::path& a, const fs::path& b) {
          const auto num = [](const fs::path& p) {
            return std::stoi(p.filename().string().substr(4));
          };
          return num(a) < num(b);
        });
        std::vector<Transcript> transcripts;
        for (const auto& log : logs) {
          std::ifstream in(log);
          transcripts.push_back(read_events_jsonl(in));
        }
        problem.reps.push_back(std::move(transcripts));
        problem.rep_failed.push_back(fs::exists(rdir / "rep.failed"));
      }
      sub.problems.push_back(std::move(problem));
    }
    out.push_back(std::move(sub));
  }
  return out;
}

RunConfig load_artifact_config(const fs::path& artifact_dir) {
  return RunConfig::from_json_file(artifact_dir / "config.json");
}

// ============================================================================
// run_experiment
// ============================================================================

RunArtifact run_experiment(const RunConfig& user_config) {
  user_config.validate();

  RunArtifact artifact;
  artifact.dir = user_config.output_dir;
  fs::create_directories(artifact.dir);

  RunConfig snapshot = user_config;
  artifact.report.experiment_kind = to_string(user_config.kind);

  const bool artifact_based =
      user_config.kind == ExperimentKind::SftFilter || user_config.kind == ExperimentKind::Analyze;

  if (!artifact_based) {
    // Pin inputs into the artifact so the snapshot replays standalone.
    const fs::path dataset_copy = artifact.dir / "data" / "dataset.jsonl";
    write_file(dataset_copy, read_file(user_config.dataset));
    snapshot.dataset = fs::absolute(dataset_copy);
    if (user_config.backend.type == BackendSettings::Type::Scripted) {
      const fs::path program_copy = artifact.dir / "programs" / "scripted.txt";
      write_file(program_copy, read_file(user_config.backend.program_file));
      snapshot.backend.program_file = fs::absolute(program_copy).string();
    }
    if (!user_config.prompt_library_file.empty()) {
      const fs::path lib_copy = artifact.dir / "data" / "prompt_library.json";
      write_file(lib_copy, read_file(user_config.prompt_library_file));
      snapshot.prompt_library_file = fs::absolute(lib_copy);
    }
  } else {
    snapshot.input_artifact = fs::absolute(user_config.input_artifact);
    if (!user_config.baseline_artifact.empty()) {
      snapshot.baseline_artifact = fs::absolute(user_config.baseline_artifact);
    }
  }
  write_file(artifact.dir / "config.json", snapshot.to_json_text());
  artifact.config = snapshot;

  if (user_config.kind == ExperimentKind::Analyze) {
    const RunConfig stored = load_artifact_config(snapshot.input_artifact);
    const auto records = load_dataset(stored.dataset);
    std::map<std::string, ProblemRecord> by_id;
    for (const auto& r : records) by_id[r.id] = r;

    const auto runs = load_artifact_runs(snapshot.input_artifact);
    for (const auto& sub : runs) {
      std::vector<ProblemEval> evals;
      for (const auto& problem : sub.problems) {
        const auto rec = by_id.find(problem.id);
        if (rec == by_id.end()) continue;
        auto eval = evaluate_problem(rec->second, problem.reps, problem.rep_failed,
                                     snapshot.aha_keywords);
        if (eval.failed) artifact.any_problem_failed = true;
        evals.push_back(std::move(eval));
      }
      artifact.report.subruns.push_back(aggregate_subrun(sub.name, std::move(evals)));
    }
    if (!snapshot.baseline_artifact.empty()) {
      const auto counts = baseline_correct_counts(snapshot.baseline_artifact);
      const SubRunReport* main_sub = nullptr;
      for (const auto& sub : artifact.report.subruns) {
        if (sub.name == "main" || (!main_sub && !sub.problems.empty())) main_sub = &sub;
        if (sub.name == "main") break;
      }
      if (main_sub) {
        artifact.report.difficulty = difficulty_table(counts, main_sub->problems);
      }
    }
    artifact.report.any_problem_failed = artifact.any_problem_failed;
    emit_report(artifact);
    return artifact;
  }

  if (user_config.kind == ExperimentKind::SftFilter) {
    const RunConfig stored = load_artifact_config(snapshot.input_artifact);
    const auto records = load_dataset(stored.dataset);
    std::map<std::string, ProblemRecord> by_id;
    for (const auto& r : records) by_id[r.id] = r;

    const auto runs = load_artifact_runs(snapshot.input_artifact);
    std::ostringstream accepted_out;
    std::size_t considered = 0, accepted_count = 0;
    for (const auto& sub : runs) {
      for (const auto& problem : sub.problems) {
        const auto rec = by_id.find(problem.id);
        if (rec == by_id.end()) continue;
        for (std::size_t r = 0; r < problem.reps.size(); ++r) {
          considered += problem.reps[r].size();
          const auto accepted = filter_sft_candidates(
              problem.reps[r], rec->second.gold_answer, rec->second.kind,
              snapshot.leap.summary_budget);
          for (const std::size_t idx : accepted) {
            const auto& t = problem.reps[r][idx];
            const json row = {{"subrun", sub.name},
                              {"problem_id", problem.id},
                              {"rep", r},
                              {"path_id", t.path_id},
                              {"generated_tokens", t.generated_tokens},
                              {"summary_tokens", t.summary_tokens},
                              {"rounds", t.rounds.size()},
                              {"text", t.response_text()}};
            accepted_out << row.dump() << '\n';
            ++accepted_count;
          }
        }
      }
    }
    write_file(artifact.dir / "sft_candidates.jsonl", accepted_out.str());
    const json summary = {{"considered", considered}, {"accepted", accepted_count}};
    write_file(artifact.dir / "sft_summary.json", summary.dump(2) + "\n");
    emit_report(artifact);
    return artifact;
  }

  // Dataset-driven kinds share the executor.
  const auto records = load_dataset(snapshot.dataset);
  const PromptLibrary library = snapshot.prompt_library_file.empty()
                                    ? PromptLibrary::defaults()
                                    : PromptLibrary::from_json_file(snapshot.prompt_library_file);
  const auto backend = make_backend(snapshot.backend);
  const Executor executor{snapshot, *backend, library};

  switch (user_config.kind) {
    case ExperimentKind::Run:
    case ExperimentKind::Baseline:
    case ExperimentKind::SingleComm: {
      LeapConfig cfg = snapshot.leap;
      if (user_config.kind == ExperimentKind::Baseline) cfg.mode = RunMode::Independent;
      if (user_config.kind == ExperimentKind::SingleComm) {
        cfg.mode = RunMode::SingleCommunication;
      }
      const auto data = executor.run_dataset("main", records, cfg,
                                             mix_seed(snapshot.seed, 1), snapshot.repetitions);
      persist_subrun(artifact.dir, data);
      artifact.report.subruns.push_back(
          report_subrun(data, snapshot.aha_keywords, &artifact.any_problem_failed));
      break;
    }
    case ExperimentKind::SweepT: {
      for (const std::size_t interval : snapshot.sweep.interval_grid) {
        LeapConfig cfg = snapshot.leap;
        cfg.interval_tokens = interval;
        const auto data =
            executor.run_dataset("T=" + std::to_string(interval), records, cfg,
                                 mix_seed(snapshot.seed, interval), snapshot.repetitions);
        persist_subrun(artifact.dir, data);
        auto sub =
            report_subrun(data, snapshot.aha_keywords, &artifact.any_problem_failed);
        SweepRow row{"T", interval, sub.pass_at_1, sub.mean_generated_tokens};
        artifact.report.sweep.push_back(row);
        artifact.report.subruns.push_back(std::move(sub));
      }
      break;
    }
    case ExperimentKind::SweepK: {
      for (const int k : snapshot.sweep.k_grid) {
        LeapConfig cfg = snapshot.leap;
        cfg.strategy.k = k;
        const auto data = executor.run_dataset(
            "k=" + std::to_string(k), records, cfg,
            mix_seed(snapshot.seed, static_cast<std::uint64_t>(k), 7), snapshot.repetitions);
        persist_subrun(artifact.dir, data);
        auto sub =
            report_subrun(data, snapshot.aha_keywords, &artifact.any_problem_failed);
        SweepRow row{"k", static_cast<std::size_t>(k), sub.pass_at_1,
                     sub.mean_generated_tokens};
        artifact.report.sweep.push_back(row);
        artifact.report.subruns.push_back(std::move(sub));
      }
      break;
    }
    case ExperimentKind::Trap: {
      auto trap = run_trap(snapshot, records, executor);
      persist_subrun(artifact.dir, trap.baseline);
      persist_subrun(artifact.dir, trap.continuations);
      write_file(artifact.dir / "prefixes" / "pool.json", trap.prefix_pool.dump(2) + "\n");
      artifact.report.subruns.push_back(
          report_subrun(trap.baseline, snapshot.aha_keywords, &artifact.any_problem_failed));
      artifact.report.subruns.push_back(report_subrun(trap.continuations, snapshot.aha_keywords,
                                                      &artifact.any_problem_failed));
      artifact.report.trap = std::move(trap.summary);
      break;
    }
    case ExperimentKind::ErrorTolerance: {
      auto tolerance = run_tolerance(snapshot, records, executor);
      persist_subrun(artifact.dir, tolerance.baseline);
      for (const auto& mix : tolerance.mixes) persist_subrun(artifact.dir, mix);
      artifact.report.subruns.push_back(report_subrun(tolerance.baseline, snapshot.aha_keywords,
                                                      &artifact.any_problem_failed));
      for (const auto& mix : tolerance.mixes) {
        artifact.report.subruns.push_back(
            report_subrun(mix, snapshot.aha_keywords, &artifact.any_problem_failed));
      }
      artifact.report.tolerance = std::move(tolerance.rows);
      break;
    }
    case ExperimentKind::SftFilter:
    case ExperimentKind::Analyze:
      break;  // handled above
  }

  artifact.report.any_problem_failed = artifact.any_problem_failed;
  emit_report(artifact);
  return artifact;
}

// ============================================================================
// Report emission
// ============================================================================

namespace {

json report_to_json(const ExperimentReport& report) {
  json subruns = json::array();
  for (const auto& sub : report.subruns) {
    json problems = json::array();
    for (const auto& p : sub.problems) {
      json reps = json::array();
      for (const auto& rep : p.reps) {
        json paths = json::array();
        for (const auto& path : rep.paths) {
          paths.push_back({{"path_id", path.path_id},
                           {"status", to_string(path.status)},
                           {"answer", path.answer.normalized},
                           {"found", path.answer.found},
                           {"correct", path.correct},
                           {"generated_tokens", path.generated_tokens},
                           {"injected_tokens", path.injected_tokens},
                           {"summary_tokens", path.summary_tokens},
                           {"aha_count", path.aha_count}});
        }
        reps.push_back({{"pass_at_1", rep.pass_at_1},
                        {"majority_answer", rep.majority.answer},
                        {"majority_found", rep.majority.found},
                        {"majority_correct", rep.majority_correct},
                        {"shortest_answer", rep.shortest.answer},
                        {"shortest_correct", rep.shortest_correct},
                        {"paths", paths}});
      }
      problems.push_back({{"id", p.problem_id},
                          {"failed", p.failed},
                          {"pass_at_1", p.mean_pass_at_1},
                          {"cons_rate", p.cons_rate},
                          {"shortest_rate", p.shortest_rate},
                          {"mean_generated_tokens", p.mean_generated_tokens},
                          {"mean_injected_tokens", p.mean_injected_tokens},
                          {"mean_summary_tokens", p.mean_summary_tokens},
                          {"mean_aha", p.mean_aha},
                          {"reps", reps}});
    }
    subruns.push_back({{"name", sub.name},
                       {"pass_at_1", sub.pass_at_1},
                       {"cons_rate", sub.cons_rate},
                       {"shortest_rate", sub.shortest_rate},
                       {"mean_generated_tokens", sub.mean_generated_tokens},
                       {"mean_injected_tokens", sub.mean_injected_tokens},
                       {"mean_summary_tokens", sub.mean_summary_tokens},
                       {"mean_aha", sub.mean_aha},
                       {"problems", problems}});
  }
  json j = {{"experiment", report.experiment_kind},
            {"any_problem_failed", report.any_problem_failed},
            {"subruns", subruns}};
  if (report.trap) {
    json rows = json::array();
    for (const auto& row : report.trap->problems) {
      rows.push_back({{"problem_id", row.problem_id},
                      {"unconstrained_acc", row.unconstrained_acc},
                      {"constrained_acc", row.constrained_acc},
                      {"gap", row.gap},
                      {"prefixes_used", row.prefixes_used}});
    }
    j["trap"] = {{"mean_gap", report.trap->mean_gap},
                 {"requested_questions", report.trap->requested_questions},
                 {"used_questions", report.trap->used_questions},
                 {"problems", rows}};
  }
  if (!report.tolerance.empty()) {
    json rows = json::array();
    for (const auto& row : report.tolerance) {
      rows.push_back(
          {{"good_count", row.good_count}, {"mode", row.mode}, {"pass_at_1", row.pass_at_1}});
    }
    j["tolerance"] = rows;
  }
  if (!report.sweep.empty()) {
    json rows = json::array();
    for (const auto& row : report.sweep) {
      rows.push_back({{"param", row.param},
                      {"value", row.value},
                      {"pass_at_1", row.pass_at_1},
                      {"mean_generated_tokens", row.mean_generated_tokens}});
    }
    j["sweep"] = rows;
  }
  if (!report.difficulty.empty()) {
    json rows = json::array();
    for (const auto& row : report.difficulty) {
      rows.push_back({{"level", to_string(row.level)},
                      {"problems", row.problem_count},
                      {"pass_at_1", row.pass_at_1},
                      {"mean_generated_tokens", row.mean_generated_tokens}});
    }
    j["difficulty"] = rows;
  }
  return j;
}

std::string report_to_text(const ExperimentReport& report) {
  std::ostringstream out;
  out << "experiment: " << report.experiment_kind << "\n";
  for (const auto& sub : report.subruns) {
    out << "\n[" << sub.name << "]\n";
    out << "  problem                     pass@1   cons     shortest  gen-tok    inj-tok    "
           "sum-tok    aha\n";
    for (const auto& p : sub.problems) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "  %-26s  %-7s  %-7s  %-8s  %-9s  %-9s  %-9s  %s%s\n",
                    p.problem_id.substr(0, 26).c_str(), format_double(p.mean_pass_at_1).c_str(),
                    format_double(p.cons_rate).c_str(), format_double(p.shortest_rate).c_str(),
                    format_double(p.mean_generated_tokens).c_str(),
                    format_double(p.mean_injected_tokens).c_str(),
                    format_double(p.mean_summary_tokens).c_str(),
                    format_double(p.mean_aha).c_str(), p.failed ? "  [FAILED]" : "");
      out << line;
    }
    out << "  aggregate                   " << format_double(sub.pass_at_1) << "   "
        << format_double(sub.cons_rate) << "   " << format_double(sub.shortest_rate) << "    "
        << format_double(sub.mean_generated_tokens) << "  "
        << format_double(sub.mean_injected_tokens) << "  "
        << format_double(sub.mean_summary_tokens) << "  " << format_double(sub.mean_aha)
        << "\n";
  }
  if (report.trap) {
    out << "\n[prefix-dominance gap]\n";
    out << "  problem                     unconstrained  constrained  gap\n";
    for (const auto& row : report.trap->problems) {
      out << "  " << row.problem_id.substr(0, 26);
      for (std::size_t pad = row.problem_id.size(); pad < 28; ++pad) out << ' ';
      out << format_double(row.unconstrained_acc) << "         " << format_double(row.constrained_acc)
          << "       " << format_double(row.gap) << "\n";
    }
    out << "  mean gap P_G = " << format_double(report.trap->mean_gap) << " ("
        << report.trap->used_questions << "/" << report.trap->requested_questions
        << " questions)\n";
  }
  if (!report.tolerance.empty()) {
    out << "\n[error tolerance]\n  good_count  mode          pass@1\n";
    for (const auto& row : report.tolerance) {
      char line[128];
      std::snprintf(line, sizeof(line), "  %-10d  %-12s  %s\n", row.good_count,
                    row.mode.c_str(), format_double(row.pass_at_1).c_str());
      out << line;
    }
  }
  if (!report.sweep.empty()) {
    out << "\n[sweep]\n  param  value   pass@1   gen-tok\n";
    for (const auto& row : report.sweep) {
      char line[128];
      std::snprintf(line, sizeof(line), "  %-5s  %-6zu  %s   %s\n", row.param.c_str(),
                    row.value, format_double(row.pass_at_1).c_str(),
                    format_double(row.mean_generated_tokens).c_str());
      out << line;
    }
  }
  if (!report.difficulty.empty()) {
    out << "\n[difficulty]\n  level       problems  pass@1   gen-tok (summaries excluded)\n";
    for (const auto& row : report.difficulty) {
      char line[128];
      std::snprintf(line, sizeof(line), "  %-10s  %-8d  %s   %s\n", to_string(row.level),
                    row.problem_count, format_double(row.pass_at_1).c_str(),
                    format_double(row.mean_generated_tokens).c_str());
      out << line;
    }
  }
  return out.str();
}

std::string scaling_csv(const ExperimentReport& report) {
  // Accuracy-vs-token series: consensus accuracy and mean consumed tokens
  // when only the first n paths of each repetition are used.
  const SubRunReport* main_sub = nullptr;
  for (const auto& sub : report.subruns) {
    if (sub.name == "main") main_sub = &sub;
  }
  if (!main_sub || main_sub->problems.empty()) return "";

  std::size_t n_paths = 0;
  for (const auto& p : main_sub->problems) {
    for (const auto& rep : p.reps) n_paths = std::max(n_paths, rep.paths.size());
  }
  if (n_paths == 0) return "";

  std::ostringstream csv;
  csv << "n_paths,mean_total_tokens,pass_at_1,cons_rate\n";
  for (std::size_t n = 1; n <= n_paths; n *= 2) {
    double tokens = 0.0, pass = 0.0, cons = 0.0;
    std::size_t samples = 0;
    for (const auto& p : main_sub->problems) {
      for (const auto& rep : p.reps) {
        if (rep.paths.size() < n) continue;
        double rep_tokens = 0.0;
        int correct = 0;
        std::map<std::string, int> tally;
        std::string best;
        int best_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto& path = rep.paths[i];
          rep_tokens += static_cast<double>(path.generated_tokens + path.summary_tokens +
                                            path.injected_tokens);
          if (path.correct) ++correct;
          if (path.answer.found) {
            const int c = ++tally[path.answer.normalized];
            if (c > best_count) {
              best_count = c;
              best = path.answer.normalized;
            }
          }
        }
        // Majority winner correct iff some counted path with that answer is correct.
        bool majority_correct = false;
        for (std::size_t i = 0; i < n; ++i) {
          if (rep.paths[i].answer.found && rep.paths[i].answer.normalized == best &&
              rep.paths[i].correct) {
            majority_correct = true;
          }
        }
        tokens += rep_tokens;
        pass += static_cast<double>(correct) / static_cast<double>(n);
        cons += majority_correct ? 1.0 : 0.0;
        ++samples;
      }
    }
    if (samples == 0) continue;
    csv << n << ',' << format_double(tokens / samples) << ','
        << format_double(pass / samples) << ',' << format_double(cons / samples) << "\n";
  }
  return csv.str();
}

}  // namespace

void emit_report(const RunArtifact& artifact) {
  const json j = report_to_json(artifact.report);
  write_file(artifact.dir / "report.json", j.dump(2) + "\n");
  write_file(artifact.dir / "report.txt", report_to_text(artifact.report));

  const std::string scaling = scaling_csv(artifact.report);
  if (!scaling.empty()) {
    write_file(artifact.dir / "plots" / "accuracy_vs_tokens.csv", scaling);
  }
  if (!artifact.report.sweep.empty()) {
    std::ostringstream csv;
    csv << "param,value,pass_at_1,mean_generated_tokens\n";
    for (const auto& row : artifact.report.sweep) {
      csv << row.param << ',' << row.value << ',' << format_double(row.pass_at_1) << ','
          << format_double(row.mean_generated_tokens) << "\n";
    }
    write_file(artifact.dir / "plots" / "sweep.csv", csv.str());
  }
  if (!artifact.report.tolerance.empty()) {
    std::ostringstream csv;
    csv << "good_count,mode,pass_at_1\n";
    for (const auto& row : artifact.report.tolerance) {
      csv << row.good_count << ',' << row.mode << ',' << format_double(row.pass_at_1) << "\n";
    }
    write_file(artifact.dir / "plots" / "tolerance.csv", csv.str());
  }

  // Manifest last: records every file in the artifact.
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(artifact.dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), artifact.dir).string();
    if (rel == "manifest.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  const json manifest = {{"engine_version", kEngineVersion},
                         {"created_at", iso_timestamp()},
                         {"experiment", artifact.report.experiment_kind},
                         {"files", files}};
  write_file(artifact.dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace leap
