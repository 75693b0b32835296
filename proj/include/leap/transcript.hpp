#pragma once

/**
 * Per-path event log and transcript. Every byte appended to a path's
 * context is recorded as an ordered event, so replaying the log
 * reconstructs the final context exactly and token ledgers can be
 * recounted from the raw events.
 *
 * Ledger separation: model-produced reasoning tokens (`generated`),
 * framework-injected peer blocks (`injected`), and summarization text
 * (`summary`, its own allowance) never mix.
 */

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "leap/backend.hpp"
#include "leap/routing.hpp"

namespace leap {

enum class EventKind {
  Prompt,         // initial context: task instruction + question
  Prefix,         // forced beginning seeded into the context
  Generate,       // one streamed generation chunk
  SummaryPrompt,  // injected trigger + open tag + template
  Summary,        // model completion + appended close tag
  Injection,      // peer block (carries routing metadata)
  Status,         // status transition note, no context bytes
};

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& name);

struct TranscriptEvent {
  EventKind kind = EventKind::Generate;
  std::string text;  // exact bytes appended to the context ("" for Status)
  std::size_t token_count = 0;
  int round = -1;  // LeaP round index where applicable
  FinishReason finish = FinishReason::None;
  bool truncated = false;      // Summary: payload hit the cap
  std::string payload;         // Summary: routable payload (template + completion)
  std::size_t payload_tokens = 0;  // Summary: payload token count
  std::vector<int> sender_ids;             // Injection: routed senders, plan order
  std::vector<std::string> sender_payloads;  // Injection: routed payloads, plan order
  std::string note;  // Status
};

enum class PathStatus { Active, Finished, BudgetExhausted, Failed };

const char* to_string(PathStatus status);
PathStatus path_status_from_string(const std::string& name);

struct LeapRoundRecord {
  int round_index = 0;
  std::size_t trigger_position_tokens = 0;  // generated tokens when the block fired
  Summary own;
  std::vector<std::pair<int, std::string>> received;  // (sender id, payload)
};

struct Transcript {
  int path_id = 0;
  PathStatus status = PathStatus::Active;
  std::vector<TranscriptEvent> events;
  std::vector<LeapRoundRecord> rounds;

  // Token ledgers, maintained event by event.
  std::size_t generated_tokens = 0;
  std::size_t injected_tokens = 0;
  std::size_t summary_tokens = 0;

  /// Concatenation of all context-bearing event text.
  std::string final_context() const;

  /// Everything after the Prompt event: forced prefix, generated text,
  /// and injected blocks — the full assistant-side response.
  std::string response_text() const;

  /// Model-produced text only: generation chunks plus summary completions
  /// (framework-injected scaffolds and peer blocks excluded).
  std::string model_text() const;

  void append(TranscriptEvent event);

  bool operator==(const Transcript& other) const;
};

/// One JSON object per line; the header line carries path id and status.
void write_events_jsonl(const Transcript& transcript, std::ostream& out);
Transcript read_events_jsonl(std::istream& in);

}  // namespace leap
