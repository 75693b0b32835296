#include "leap/transcript.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace leap {

using nlohmann::json;

const char* to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::None: return "none";
    case FinishReason::Budget: return "budget";
    case FinishReason::StopSequence: return "stop_sequence";
    case FinishReason::EndOfSequence: return "end_of_sequence";
  }
  return "none";
}

FinishReason finish_reason_from_string(const std::string& name) {
  if (name == "none") return FinishReason::None;
  if (name == "budget") return FinishReason::Budget;
  if (name == "stop_sequence") return FinishReason::StopSequence;
  if (name == "end_of_sequence") return FinishReason::EndOfSequence;
  throw std::invalid_argument("unknown finish reason: " + name);
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Prompt: return "prompt";
    case EventKind::Prefix: return "prefix";
    case EventKind::Generate: return "generate";
    case EventKind::SummaryPrompt: return "summary_prompt";
    case EventKind::Summary: return "summary";
    case EventKind::Injection: return "injection";
    case EventKind::Status: return "status";
  }
  return "generate";
}

EventKind event_kind_from_string(const std::string& name) {
  if (name == "prompt") return EventKind::Prompt;
  if (name == "prefix") return EventKind::Prefix;
  if (name == "generate") return EventKind::Generate;
  if (name == "summary_prompt") return EventKind::SummaryPrompt;
  if (name == "summary") return EventKind::Summary;
  if (name == "injection") return EventKind::Injection;
  if (name == "status") return EventKind::Status;
  throw std::invalid_argument("unknown event kind: " + name);
}

const char* to_string(PathStatus status) {
  switch (status) {
    case PathStatus::Active: return "active";
    case PathStatus::Finished: return "finished";
    case PathStatus::BudgetExhausted: return "budget_exhausted";
    case PathStatus::Failed: return "failed";
  }
  return "active";
}

PathStatus path_status_from_string(const std::string& name) {
  if (name == "active") return PathStatus::Active;
  if (name == "finished") return PathStatus::Finished;
  if (name == "budget_exhausted") return PathStatus::BudgetExhausted;
  if (name == "failed") return PathStatus::Failed;
  throw std::invalid_argument("unknown path status: " + name);
}

std::string Transcript::final_context() const {
  std::string out;
  for (const auto& e : events) out += e.text;
  return out;
}

std::string Transcript::response_text() const {
  std::string out;
  for (const auto& e : events) {
    if (e.kind != EventKind::Prompt) out += e.text;
  }
  return out;
}

std::string Transcript::model_text() const {
  std::string out;
  for (const auto& e : events) {
    if (e.kind == EventKind::Generate) {
      out += e.text;
    } else if (e.kind == EventKind::Summary) {
      // The close tag at the end of the event text is framework-appended.
      out += e.payload;
    }
  }
  return out;
}

void Transcript::append(TranscriptEvent event) {
  switch (event.kind) {
    case EventKind::Generate:
      generated_tokens += event.token_count;
      break;
    case EventKind::Injection:
      injected_tokens += event.token_count;
      break;
    case EventKind::SummaryPrompt:
    case EventKind::Summary:
      summary_tokens += event.token_count;
      break;
    default:
      break;
  }
  events.push_back(std::move(event));
}

bool Transcript::operator==(const Transcript& other) const {
  if (path_id != other.path_id || status != other.status ||
      events.size() != other.events.size()) {
    return false;
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& a = events[i];
    const auto& b = other.events[i];
    if (a.kind != b.kind || a.text != b.text || a.token_count != b.token_count ||
        a.round != b.round || a.finish != b.finish || a.truncated != b.truncated ||
        a.payload != b.payload || a.payload_tokens != b.payload_tokens ||
        a.sender_ids != b.sender_ids ||
        a.sender_payloads != b.sender_payloads || a.note != b.note) {
      return false;
    }
  }
  return true;
}

void write_events_jsonl(const Transcript& transcript, std::ostream& out) {
  json header = {{"record", "path"},
                 {"path_id", transcript.path_id},
                 {"status", to_string(transcript.status)},
                 {"generated_tokens", transcript.generated_tokens},
                 {"injected_tokens", transcript.injected_tokens},
                 {"summary_tokens", transcript.summary_tokens}};
  out << header.dump() << '\n';
  for (const auto& e : transcript.events) {
    json j = {{"kind", to_string(e.kind)}, {"text", e.text}, {"tokens", e.token_count}};
    if (e.round >= 0) j["round"] = e.round;
    if (e.finish != FinishReason::None) j["finish"] = to_string(e.finish);
    if (e.truncated) j["truncated"] = true;
    if (!e.payload.empty()) j["payload"] = e.payload;
    if (e.payload_tokens > 0) j["payload_tokens"] = e.payload_tokens;
    if (!e.sender_ids.empty()) j["senders"] = e.sender_ids;
    if (!e.sender_payloads.empty()) j["sender_payloads"] = e.sender_payloads;
    if (!e.note.empty()) j["note"] = e.note;
    out << j.dump() << '\n';
  }
}

Transcript read_events_jsonl(std::istream& in) {
  Transcript t;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!header_seen) {
      if (!j.contains("record") || j["record"] != "path") {
        throw std::runtime_error("event log: missing path header");
      }
      t.path_id = j["path_id"];
      t.status = path_status_from_string(j["status"]);
      header_seen = true;
      continue;
    }
    TranscriptEvent e;
    e.kind = event_kind_from_string(j["kind"]);
    e.text = j["text"].get<std::string>();
    e.token_count = j["tokens"].get<std::size_t>();
    if (j.contains("round")) e.round = j["round"];
    if (j.contains("finish")) e.finish = finish_reason_from_string(j["finish"]);
    if (j.contains("truncated")) e.truncated = j["truncated"];
    if (j.contains("payload")) e.payload = j["payload"].get<std::string>();
    if (j.contains("payload_tokens")) e.payload_tokens = j["payload_tokens"].get<std::size_t>();
    if (j.contains("senders")) e.sender_ids = j["senders"].get<std::vector<int>>();
    if (j.contains("sender_payloads")) {
      e.sender_payloads = j["sender_payloads"].get<std::vector<std::string>>();
    }
    if (j.contains("note")) e.note = j["note"].get<std::string>();
    t.append(std::move(e));
  }
  if (!header_seen) throw std::runtime_error("event log: empty stream");

  // Rebuild round records from summary/injection events.
  for (const auto& e : t.events) {
    if (e.kind == EventKind::Summary) {
      LeapRoundRecord rec;
      rec.round_index = e.round;
      rec.trigger_position_tokens = 0;  // recomputed below
      rec.own.path_id = t.path_id;
      rec.own.round = e.round;
      rec.own.payload = e.payload;
      rec.own.token_count = e.payload_tokens;
      rec.own.truncated = e.truncated;
      t.rounds.push_back(std::move(rec));
    } else if (e.kind == EventKind::Injection && !t.rounds.empty()) {
      auto& rec = t.rounds.back();
      for (std::size_t i = 0; i < e.sender_ids.size(); ++i) {
        rec.received.emplace_back(e.sender_ids[i],
                                  i < e.sender_payloads.size() ? e.sender_payloads[i] : "");
      }
    }
  }
  std::size_t generated_before = 0;
  std::size_t round_idx = 0;
  for (const auto& e : t.events) {
    if (e.kind == EventKind::Generate) generated_before += e.token_count;
    if (e.kind == EventKind::Summary && round_idx < t.rounds.size()) {
      t.rounds[round_idx++].trigger_position_tokens = generated_before;
    }
  }
  return t;
}

}  // namespace leap
