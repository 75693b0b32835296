#include "leap/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "leap/errors.hpp"
#include "leap/seeding.hpp"

namespace leap {

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Leap: return "leap";
    case RunMode::Independent: return "independent";
    case RunMode::SingleCommunication: return "single_communication";
  }
  return "leap";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "leap") return RunMode::Leap;
  if (name == "independent") return RunMode::Independent;
  if (name == "single_communication" || name == "single_comm") {
    return RunMode::SingleCommunication;
  }
  throw ConfigError("unknown run mode: " + name);
}

void LeapConfig::validate() const {
  if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
  if (mode != RunMode::Independent && n_paths < 2) {
    throw ConfigError(std::string(to_string(mode)) + " mode requires n_paths >= 2");
  }
  if (interval_tokens < 1) throw ConfigError("interval_tokens must be >= 1");
  if (summary_budget < 1) throw ConfigError("summary_budget must be >= 1");
  if (strategy.k < 1) throw ConfigError("routing k must be >= 1");
  if (generation.max_total_tokens < 1) throw ConfigError("max_total_tokens must be >= 1");
  if (mode == RunMode::SingleCommunication && single_comm_position < 1) {
    throw ConfigError("single_comm_position must be >= 1");
  }
  for (const auto& [path_id, prefix] : prefix_assignment) {
    if (path_id < 0 || path_id >= n_paths) {
      throw ConfigError("prefix assigned to unknown path " + std::to_string(path_id));
    }
    (void)prefix;
  }
}

std::string initial_context(const PromptLibrary& library, TaskKind kind,
                            const std::string& question, const std::string& prefix) {
  return question + "\n" + task_instruction(library, kind) + "\n" + prefix;
}

namespace {

struct PathState {
  int id = 0;
  std::string context;
  Transcript transcript;
  std::size_t since_block = 0;  // generated tokens since the last block

  bool active() const { return transcript.status == PathStatus::Active; }
};

void set_status(PathState& path, PathStatus status, const std::string& note) {
  // Transitions are monotone: only Active may move.
  if (path.transcript.status != PathStatus::Active) return;
  path.transcript.status = status;
  TranscriptEvent e;
  e.kind = EventKind::Status;
  e.note = note;
  path.transcript.append(std::move(e));
}

/// Per-slot outcome of a parallel phase: value, error, or timed out.
template <typename R>
struct SlotResult {
  std::optional<R> value;
  std::exception_ptr error;
  bool timed_out = false;
};

/// Runs jobs concurrently (bounded by `parallelism`) and collects results
/// in job order. When `timeout_ms` > 0 and the deadline passes, unfinished
/// slots are marked timed out and the pool is abandoned; late completions
/// write into shared state that outlives the call.
template <typename R>
std::vector<SlotResult<R>> run_phase(std::vector<std::function<R()>> jobs, int parallelism,
                                     int timeout_ms) {
  struct Shared {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t completed = 0;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abandoned{false};
    std::vector<SlotResult<R>> slots;
  };
  auto shared = std::make_shared<Shared>();
  shared->slots.resize(jobs.size());
  auto work = std::make_shared<std::vector<std::function<R()>>>(std::move(jobs));

  const std::size_t n_workers =
      std::min<std::size_t>(parallelism > 0 ? static_cast<std::size_t>(parallelism)
                                            : work->size(),
                            work->size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([shared, work] {
      for (;;) {
        const std::size_t i = shared->next.fetch_add(1);
        if (i >= work->size() || shared->abandoned.load()) break;
        SlotResult<R> slot;
        try {
          slot.value = (*work)[i]();
        } catch (...) {
          slot.error = std::current_exception();
        }
        {
          std::lock_guard lock(shared->mu);
          shared->slots[i] = std::move(slot);
          ++shared->completed;
        }
        shared->cv.notify_all();
      }
    });
  }

  std::vector<SlotResult<R>> out;
  {
    std::unique_lock lock(shared->mu);
    const auto all_done = [&] { return shared->completed == work->size(); };
    if (timeout_ms > 0) {
      shared->cv.wait_until(lock, std::chrono::steady_clock::now() +
                                      std::chrono::milliseconds(timeout_ms),
                            all_done);
    } else {
      shared->cv.wait(lock, all_done);
    }
    out = shared->slots;
    if (shared->completed < work->size()) {
      shared->abandoned.store(true);
      for (auto& slot : out) {
        if (!slot.value && !slot.error) slot.timed_out = true;
      }
    }
  }
  for (auto& t : pool) {
    if (shared->abandoned.load()) {
      t.detach();
    } else {
      t.join();
    }
  }
  return out;
}

struct Engine {
  TextBackend& backend;
  const PromptLibrary& library;
  const LeapConfig& config;
  std::uint64_t run_seed;
  std::vector<PathState> paths;

  std::size_t effective_interval() const {
    return config.mode == RunMode::SingleCommunication ? config.single_comm_position
                                                       : config.interval_tokens;
  }

  int round_limit() const {
    if (config.mode == RunMode::SingleCommunication) return 1;
    return config.max_rounds;  // 0 = unlimited
  }

  GenerationConfig path_config(int path_id) const {
    GenerationConfig cfg = config.generation;
    cfg.stream_id = path_id;
    cfg.seed = path_seed(run_seed, path_id);
    return cfg;
  }

  std::vector<PathState*> active_paths() {
    std::vector<PathState*> out;
    for (auto& p : paths) {
      if (p.active()) out.push_back(&p);
    }
    return out;
  }

  void append_generation(PathState& path, const GenerationResult& gen) {
    if (!gen.text.empty() || gen.token_count > 0) {
      TranscriptEvent e;
      e.kind = EventKind::Generate;
      e.text = gen.text;
      e.token_count = gen.token_count;
      e.finish = gen.finish;
      path.context += gen.text;
      path.transcript.append(std::move(e));
    }
    path.since_block += gen.token_count;
  }

  /// Phase 1: every active path generates until its interval quota, its
  /// total budget, or the end of its sequence.
  void generation_phase(bool blocks_pending) {
    auto targets = active_paths();
    if (targets.empty()) return;

    std::vector<std::function<GenerationResult()>> jobs;
    jobs.reserve(targets.size());
    for (PathState* p : targets) {
      const std::size_t remaining =
          config.generation.max_total_tokens - p->transcript.generated_tokens;
      std::size_t quota = remaining;
      if (blocks_pending) {
        quota = std::min(quota, effective_interval() - p->since_block);
      }
      jobs.emplace_back([this, p, quota] {
        return backend.generate(p->context, quota, path_config(p->id));
      });
    }

    const auto slots = run_phase(std::move(jobs), config.parallelism, config.round_timeout_ms);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      PathState& path = *targets[i];
      const auto& slot = slots[i];
      if (slot.timed_out) {
        set_status(path, PathStatus::Failed, "generation timed out at round barrier");
        continue;
      }
      if (slot.error) {
        try {
          std::rethrow_exception(slot.error);
        } catch (const std::exception& e) {
          set_status(path, PathStatus::Failed, std::string("generation failed: ") + e.what());
        }
        continue;
      }
      append_generation(path, *slot.value);
      const std::size_t total = path.transcript.generated_tokens;
      switch (slot.value->finish) {
        case FinishReason::EndOfSequence:
          set_status(path, PathStatus::Finished, "end of sequence");
          break;
        case FinishReason::StopSequence:
          set_status(path, PathStatus::Finished,
                     "stop sequence: " + slot.value->matched_stop);
          break;
        case FinishReason::Budget:
          if (total >= config.generation.max_total_tokens) {
            set_status(path, PathStatus::BudgetExhausted, "token budget exhausted");
          }
          break;
        case FinishReason::None:
          // A conforming backend always reports a definite finish.
          set_status(path, PathStatus::Failed, "backend returned no finish reason");
          break;
      }
    }
  }

  struct SummaryOutcome {
    std::string prompt_text;
    std::string appended_text;
    Summary summary;
    FinishReason finish = FinishReason::None;
  };

  /// Phase 2: summarization sub-step for one path. The framework appends
  /// the trigger/template lead-in, generates with the close tag as a stop
  /// sequence, and appends the close tag itself when the cap fires first.
  SummaryOutcome summarize(const PathState& path, int round) const {
    const SummaryPrompt parts = build_summary_prompt(library, run_seed, round, path.id);
    SummaryOutcome out;
    out.prompt_text = "\n" + parts.text;

    const std::size_t template_tokens = backend.count_tokens(parts.summary_template);
    const std::size_t completion_budget =
        config.summary_budget > template_tokens ? config.summary_budget - template_tokens : 1;

    GenerationConfig cfg = path_config(path.id);
    cfg.stop_sequences.push_back(library.close_tag);
    const GenerationResult res =
        backend.generate(path.context + out.prompt_text, completion_budget, cfg);

    out.finish = res.finish;
    out.summary.path_id = path.id;
    out.summary.round = round;
    out.summary.payload = parts.summary_template + res.text;
    out.summary.truncated = res.finish == FinishReason::Budget;
    out.summary.token_count = backend.count_tokens(out.summary.payload);
    out.appended_text = res.text + " " + library.close_tag + "\n";
    return out;
  }

  /// Phases 2-4 at the round barrier. Returns false when routing was
  /// skipped (fewer than two active paths).
  bool leap_round(int round) {
    auto targets = active_paths();
    if (targets.size() < 2) {
      for (PathState* p : targets) {
        TranscriptEvent e;
        e.kind = EventKind::Status;
        e.round = round;
        e.note = "routing skipped: fewer than two active paths";
        p->transcript.append(std::move(e));
      }
      return false;
    }

    std::vector<std::function<SummaryOutcome()>> jobs;
    jobs.reserve(targets.size());
    for (PathState* p : targets) {
      jobs.emplace_back([this, p, round] { return summarize(*p, round); });
    }
    const auto slots = run_phase(std::move(jobs), config.parallelism, config.round_timeout_ms);

    std::vector<Summary> summaries;
    std::vector<PathState*> participants;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      PathState& path = *targets[i];
      const auto& slot = slots[i];
      if (slot.timed_out) {
        set_status(path, PathStatus::Failed, "summarization timed out");
        continue;
      }
      if (slot.error) {
        try {
          std::rethrow_exception(slot.error);
        } catch (const std::exception& e) {
          set_status(path, PathStatus::Failed, std::string("summarization failed: ") + e.what());
        }
        continue;
      }
      const SummaryOutcome& outcome = *slot.value;

      TranscriptEvent prompt_event;
      prompt_event.kind = EventKind::SummaryPrompt;
      prompt_event.text = outcome.prompt_text;
      prompt_event.token_count = backend.count_tokens(outcome.prompt_text);
      prompt_event.round = round;
      path.context += outcome.prompt_text;
      path.transcript.append(std::move(prompt_event));

      TranscriptEvent summary_event;
      summary_event.kind = EventKind::Summary;
      summary_event.text = outcome.appended_text;
      summary_event.token_count = backend.count_tokens(outcome.appended_text);
      summary_event.round = round;
      summary_event.truncated = outcome.summary.truncated;
      summary_event.payload = outcome.summary.payload;
      summary_event.payload_tokens = outcome.summary.token_count;
      path.context += outcome.appended_text;
      path.transcript.append(std::move(summary_event));

      LeapRoundRecord record;
      record.round_index = round;
      record.trigger_position_tokens = path.transcript.generated_tokens;
      record.own = outcome.summary;
      path.transcript.rounds.push_back(std::move(record));

      summaries.push_back(outcome.summary);
      participants.push_back(&path);
    }

    if (participants.size() < 2) {
      for (PathState* p : participants) {
        TranscriptEvent e;
        e.kind = EventKind::Status;
        e.round = round;
        e.note = "routing skipped: fewer than two active paths";
        p->transcript.append(std::move(e));
      }
      return false;
    }

    RoutingStrategy strategy = config.strategy;
    strategy.seed = mix_seed(run_seed, config.strategy.seed, static_cast<std::uint64_t>(round));
    const auto plan = route(summaries, strategy);
    if (!plan) return false;  // unreachable with >= 2 summaries

    for (PathState* p : participants) {
      const auto it = plan->entries.find(p->id);
      if (it == plan->entries.end()) continue;
      std::vector<std::string> payloads;
      TranscriptEvent injection;
      injection.kind = EventKind::Injection;
      injection.round = round;
      for (const Summary& s : it->second) {
        payloads.push_back(s.payload);
        injection.sender_ids.push_back(s.path_id);
        injection.sender_payloads.push_back(s.payload);
        p->transcript.rounds.back().received.emplace_back(s.path_id, s.payload);
      }
      injection.text = build_peer_block(library, payloads);
      injection.token_count = backend.count_tokens(injection.text);
      p->context += injection.text;
      p->transcript.append(std::move(injection));
      p->since_block = 0;
    }
    return true;
  }
};

}  // namespace

std::vector<Transcript> Orchestrator::run_problem(const std::string& question, TaskKind kind,
                                                  const LeapConfig& config,
                                                  std::uint64_t seed) const {
  config.validate();

  Engine engine{backend_, library_, config, seed, {}};
  engine.paths.resize(config.n_paths);
  const std::string prompt_text = question + "\n" + task_instruction(library_, kind) + "\n";
  for (int i = 0; i < config.n_paths; ++i) {
    PathState& path = engine.paths[i];
    path.id = i;
    path.transcript.path_id = i;

    TranscriptEvent prompt_event;
    prompt_event.kind = EventKind::Prompt;
    prompt_event.text = prompt_text;
    prompt_event.token_count = backend_.count_tokens(prompt_text);
    path.context += prompt_text;
    path.transcript.append(std::move(prompt_event));

    const auto prefix_it = config.prefix_assignment.find(i);
    if (prefix_it != config.prefix_assignment.end() && !prefix_it->second.empty()) {
      TranscriptEvent prefix_event;
      prefix_event.kind = EventKind::Prefix;
      prefix_event.text = prefix_it->second;
      prefix_event.token_count = backend_.count_tokens(prefix_it->second);
      path.context += prefix_it->second;
      path.transcript.append(std::move(prefix_event));
    }
  }

  bool blocks_disabled = config.mode == RunMode::Independent;
  int round = 0;
  while (!engine.active_paths().empty()) {
    const int limit = engine.round_limit();
    const bool blocks_pending = !blocks_disabled && (limit == 0 || round < limit);
    engine.generation_phase(blocks_pending);
    if (!blocks_pending) continue;  // paths ran to completion; loop drains
    if (engine.active_paths().empty()) break;
    if (!engine.leap_round(round)) {
      // Routing skipped: remaining paths continue independently.
      blocks_disabled = true;
      continue;
    }
    ++round;
  }

  std::vector<Transcript> transcripts;
  transcripts.reserve(engine.paths.size());
  bool any_ok = false;
  for (auto& path : engine.paths) {
    if (path.transcript.status != PathStatus::Failed) any_ok = true;
    transcripts.push_back(std::move(path.transcript));
  }
  if (!any_ok) throw AllPathsFailed(std::move(transcripts));
  return transcripts;
}

}  // namespace leap
