#pragma once

/**
 * Uniform streaming text-generation interface. Two implementations ship
 * with the engine: ScriptedBackend (deterministic programs for tests and
 * desk-scale experiments) and HttpBackend (OpenAI-compatible wire
 * protocol with SSE streaming).
 *
 * The backend is the source of truth for token accounting; every budget
 * in the engine is expressed in backend tokens.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leap {

struct GenerationConfig {
  double temperature = 0.6;
  double top_p = 0.95;
  std::optional<int> top_k = 40;
  std::size_t max_total_tokens = 16384;
  std::vector<std::string> stop_sequences;
  std::optional<std::uint64_t> seed;
  /// Logical stream identity set by the orchestrator (one per parallel
  /// path). The scripted backend selects its program by this id; the
  /// remote client forwards it as a request tag only.
  std::optional<int> stream_id;
};

enum class FinishReason { None, Budget, StopSequence, EndOfSequence };

const char* to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& name);

struct GenerationChunk {
  std::string text;
  std::size_t token_count = 0;
  FinishReason finish = FinishReason::None;
  std::string matched_stop;  // set when finish == StopSequence
};

/// Aggregate of one generate() call. `text` excludes any matched stop
/// sequence; `token_count` never exceeds the requested budget.
struct GenerationResult {
  std::string text;
  std::size_t token_count = 0;
  FinishReason finish = FinishReason::None;
  std::string matched_stop;
  int attempts = 1;
};

using ChunkSink = std::function<void(const GenerationChunk&)>;

/// Backend-consistent token arithmetic, usable independently of generation.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;

  virtual std::size_t count_tokens(std::string_view text) const = 0;

  /// Prefix of `text` covering its first `max_tokens` tokens, byte-exact
  /// with respect to the original text.
  virtual std::string token_prefix(std::string_view text, std::size_t max_tokens) const = 0;
};

class TextBackend : public TokenCounter {
 public:
  /// Streams a continuation of `context`. At most `budget_tokens` tokens
  /// are produced; the call terminates with a definite finish reason.
  /// Chunks are forwarded to `sink` when provided. Transport failures are
  /// retried internally; a BackendError is thrown once retries are
  /// exhausted (retriable=true) or the request is rejected outright
  /// (retriable=false, e.g. context overflow).
  ///
  /// Preconditions: budget_tokens >= 1, context non-empty.
  virtual GenerationResult generate(std::string_view context, std::size_t budget_tokens,
                                    const GenerationConfig& config,
                                    const ChunkSink& sink = nullptr) = 0;
};

}  // namespace leap
