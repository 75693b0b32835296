#include "leap/prompt_kit.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "leap/errors.hpp"
#include "leap/seeding.hpp"

namespace leap {

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Math: return "math";
    case TaskKind::MultipleChoice: return "multiple_choice";
  }
  return "math";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "math") return TaskKind::Math;
  if (name == "multiple_choice" || name == "multiple-choice" || name == "mc") {
    return TaskKind::MultipleChoice;
  }
  throw ConfigError("unknown task kind: " + name);
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  lib.summary_triggers = {
      "Alright, let's take a step back and summarize what we've figured out so far.",
      "Wait, let me quickly recap what I've concluded so far.",
      "Alright, let me shortly review the conclusions I've drawn so I can move forward more "
      "efficiently.",
      "Hmm, a quick summary of what I've figured out might help streamline the next part of my "
      "reasoning.",
      "Hold on, I should summarize the key points briefly to ensure I'm on the right track.",
      "Okay, before continuing, let me put together a brief summary of the insights I've gathered "
      "so far.",
      "Okay, time to consolidate everything I've found into a concise summary.",
  };
  lib.summary_templates = {
      "In short, my current conclusions are that",
      "To summarize, based on my previous reasoning, I have currently found that",
      "In conclusion, the current key takeaways and results are",
      "In short, I've currently concluded that",
      "To summarize, my recent findings are",
      "In conclusion, the current insights and results I've gathered are",
  };
  lib.reflection_bridge =
      "Hmm, it seems that my peers have given me some comments, so let me check if anyone's "
      "conclusions are different from mine before I continue my own reasoning.";
  lib.task_prompts = {
      {"math", "Please reason step by step, and put your final answer within \\boxed{}."},
      {"multiple_choice",
       "Please show your choice in the answer field with only the choice letter, e.g., "
       "\"ANSWER\": \"C\"."},
  };
  return lib;
}

PromptLibrary PromptLibrary::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prompt library: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid prompt library JSON (" + path.string() + "): " + e.what());
  }

  PromptLibrary lib = defaults();
  if (j.contains("summary_triggers")) lib.summary_triggers = j["summary_triggers"];
  if (j.contains("summary_templates")) lib.summary_templates = j["summary_templates"];
  if (j.contains("reflection_bridge")) lib.reflection_bridge = j["reflection_bridge"];
  if (j.contains("open_tag")) lib.open_tag = j["open_tag"];
  if (j.contains("close_tag")) lib.close_tag = j["close_tag"];
  if (j.contains("peer_open")) lib.peer_open = j["peer_open"];
  if (j.contains("peer_close")) lib.peer_close = j["peer_close"];
  if (j.contains("task_prompts")) {
    for (const auto& [kind, text] : j["task_prompts"].items()) {
      lib.task_prompts[kind] = text.get<std::string>();
    }
  }
  lib.validate();
  return lib;
}

void PromptLibrary::validate() const {
  if (summary_triggers.empty()) throw ConfigError("prompt library: empty trigger list");
  if (summary_templates.empty()) throw ConfigError("prompt library: empty template list");
  if (open_tag.empty() || close_tag.empty()) throw ConfigError("prompt library: empty tag");
  if (open_tag == close_tag) throw ConfigError("prompt library: open and close tags must differ");
}

SummaryPrompt build_summary_prompt(const PromptLibrary& library, std::uint64_t seed, int round,
                                   int path_id) {
  library.validate();
  SplitMix64 rng{mix_seed(seed, static_cast<std::uint64_t>(round),
                          static_cast<std::uint64_t>(path_id))};
  SummaryPrompt prompt;
  prompt.trigger = library.summary_triggers[rng.below(library.summary_triggers.size())];
  prompt.summary_template =
      library.summary_templates[rng.below(library.summary_templates.size())];
  prompt.text = prompt.trigger + "\n" + library.open_tag + " " + prompt.summary_template;
  return prompt;
}

std::string build_peer_block(const PromptLibrary& library,
                             const std::vector<std::string>& payloads) {
  if (payloads.empty()) return "";
  std::string block = "\n" + library.peer_open + "\n";
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    block += "Peer " + std::to_string(i + 1) + ": \"" + payloads[i] + "\"\n";
  }
  block += library.peer_close + "\n" + library.reflection_bridge + "\n";
  return block;
}

std::vector<std::string> parse_peer_block(const PromptLibrary& library,
                                          const std::string& block) {
  std::vector<std::string> payloads;
  const std::string open_line = library.peer_open + "\n";
  const auto open_at = block.find(open_line);
  if (open_at == std::string::npos) throw std::invalid_argument("peer block: missing open tag");

  std::size_t pos = open_at + open_line.size();
  for (std::size_t i = 1;; ++i) {
    const std::string label = "Peer " + std::to_string(i) + ": \"";
    if (pos >= block.size() || block.compare(pos, label.size(), label) != 0) break;
    pos += label.size();
    // Payload runs to the quote that precedes the next label or the close tag.
    const std::string next_label = "\"\nPeer " + std::to_string(i + 1) + ": \"";
    const std::string terminator = "\"\n" + library.peer_close + "\n";
    std::size_t end = block.find(next_label, pos);
    if (end == std::string::npos) {
      end = block.find(terminator, pos);
      if (end == std::string::npos) throw std::invalid_argument("peer block: unterminated entry");
    }
    payloads.push_back(block.substr(pos, end - pos));
    pos = end + 2;  // past the quote and newline
  }
  if (payloads.empty()) throw std::invalid_argument("peer block: no peer entries");
  return payloads;
}

const std::string& task_instruction(const PromptLibrary& library, TaskKind kind) {
  const auto it = library.task_prompts.find(to_string(kind));
  if (it == library.task_prompts.end()) {
    throw ConfigError(std::string("no task prompt configured for kind: ") + to_string(kind));
  }
  return it->second;
}

}  // namespace leap
