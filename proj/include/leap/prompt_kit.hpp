#pragma once

/**
 * Textual scaffolds injected around the protocol: summary triggers and
 * templates, summary/peer block tags, the reflection bridge, and per-task
 * instructions. The default library is embedded; a JSON file can override
 * any part of it.
 */

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace leap {

enum class TaskKind { Math, MultipleChoice };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

struct PromptLibrary {
  std::vector<std::string> summary_triggers;
  std::vector<std::string> summary_templates;
  std::string reflection_bridge;
  std::map<std::string, std::string> task_prompts;  // keyed by task kind name
  std::string open_tag = "<summarize>";
  std::string close_tag = "</summarize>";
  std::string peer_open = "<peer_summaries>";
  std::string peer_close = "</peer_summaries>";

  static PromptLibrary defaults();
  static PromptLibrary from_json_file(const std::filesystem::path& path);

  /// Throws ConfigError when lists are empty or tags collide.
  void validate() const;
};

/// The framework-injected lead-in of a summarization sub-step.
struct SummaryPrompt {
  std::string trigger;
  std::string summary_template;
  std::string text;  // trigger + open tag + template, ends mid-sentence
};

/// Trigger and template are picked deterministically from the library's
/// lists, keyed by (seed, round, path_id).
SummaryPrompt build_summary_prompt(const PromptLibrary& library, std::uint64_t seed, int round,
                                   int path_id);

/// Peer block injected after routing: anonymized "Peer 1..m" labels in
/// plan order, quote-wrapped payloads, followed by the reflection bridge.
/// Empty input yields an empty string (no injection).
std::string build_peer_block(const PromptLibrary& library,
                             const std::vector<std::string>& payloads);

/// Inverse of build_peer_block for the persistence layer; returns the
/// payloads in label order. Throws std::invalid_argument on malformed text.
std::vector<std::string> parse_peer_block(const PromptLibrary& library, const std::string& block);

/// Verbatim task instruction. Unknown kinds raise ConfigError.
const std::string& task_instruction(const PromptLibrary& library, TaskKind kind);

}  // namespace leap
