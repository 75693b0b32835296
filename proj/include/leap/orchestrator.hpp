#pragma once

/**
 * The peer-exchange state machine. Drives N parallel reasoning paths
 * through alternating generation intervals and exchange blocks:
 *
 *   1. each active path generates until it has produced `interval_tokens`
 *      new tokens since the last block (or finishes / exhausts budget);
 *   2. at the round barrier every still-active path summarizes its
 *      reasoning into a capped summary;
 *   3. routing computes which peer summaries each path receives;
 *   4. each path's context is extended with its own summary block and
 *      then its peer block, and generation resumes.
 *
 * Independent mode skips 2-4 entirely. Single-communication mode runs
 * the block exactly once, when a path first crosses a configured token
 * position. Paths generate concurrently between barriers; the barrier,
 * routing, and injection are one serialized step per round.
 */

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "leap/backend.hpp"
#include "leap/prompt_kit.hpp"
#include "leap/routing.hpp"
#include "leap/transcript.hpp"

namespace leap {

enum class RunMode { Leap, Independent, SingleCommunication };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

struct LeapConfig {
  int n_paths = 4;
  std::size_t interval_tokens = 4096;
  RoutingStrategy strategy;
  std::size_t summary_budget = 256;
  RunMode mode = RunMode::Leap;
  std::size_t single_comm_position = 4096;  // single_communication only
  int max_rounds = 0;                       // 0 = unlimited (leap mode)
  std::map<int, std::string> prefix_assignment;
  GenerationConfig generation;
  int parallelism = 0;       // concurrent generate calls; 0 = one per path
  int round_timeout_ms = 0;  // wall-clock limit per phase; stragglers fail

  /// Throws ConfigError on invalid combinations (e.g. peer modes with
  /// fewer than two paths).
  void validate() const;
};

/// Raised when every path of a problem failed; carries what was produced.
struct AllPathsFailed : std::runtime_error {
  std::vector<Transcript> transcripts;
  explicit AllPathsFailed(std::vector<Transcript> partial)
      : std::runtime_error("all reasoning paths failed"), transcripts(std::move(partial)) {}
};

/// Initial context: task instruction + question + forced prefix. The
/// prefix ends the context byte-for-byte and is never counted as
/// generated output.
std::string initial_context(const PromptLibrary& library, TaskKind kind,
                            const std::string& question, const std::string& prefix);

class Orchestrator {
 public:
  Orchestrator(TextBackend& backend, PromptLibrary library)
      : backend_(backend), library_(std::move(library)) {
    library_.validate();
  }

  /// Runs one problem to completion and returns one transcript per path.
  std::vector<Transcript> run_problem(const std::string& question, TaskKind kind,
                                      const LeapConfig& config, std::uint64_t seed) const;

  const PromptLibrary& library() const { return library_; }

 private:
  TextBackend& backend_;
  PromptLibrary library_;
};

}  // namespace leap
