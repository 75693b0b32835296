#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "leap/errors.hpp"
#include "leap/prompt_kit.hpp"
#include "leap/seeding.hpp"

using namespace leap;

TEST_CASE("default library carries the full trigger and template lists") {
  const auto lib = PromptLibrary::defaults();
  CHECK(lib.summary_triggers.size() == 7);
  CHECK(lib.summary_templates.size() == 6);
  CHECK(lib.open_tag == "<summarize>");
  CHECK(lib.close_tag == "</summarize>");
  CHECK(lib.peer_open == "<peer_summaries>");
  CHECK(lib.peer_close == "</peer_summaries>");
  CHECK_NOTHROW(lib.validate());
}

TEST_CASE("summary prompt starts with a trigger verbatim and ends mid-sentence") {
  const auto lib = PromptLibrary::defaults();
  const auto prompt = build_summary_prompt(lib, 42, 0, 3);
  const bool starts_with_trigger =
      std::any_of(lib.summary_triggers.begin(), lib.summary_triggers.end(),
                  [&](const std::string& t) { return prompt.text.rfind(t, 0) == 0; });
  CHECK(starts_with_trigger);
  const bool ends_with_template =
      prompt.text.size() >= prompt.summary_template.size() &&
      prompt.text.compare(prompt.text.size() - prompt.summary_template.size(),
                          prompt.summary_template.size(), prompt.summary_template) == 0;
  CHECK(ends_with_template);
  CHECK(prompt.text.find(lib.open_tag) != std::string::npos);
  CHECK(prompt.text.back() != '.');
}

TEST_CASE("prompt selection is deterministic in (seed, round, path)") {
  const auto lib = PromptLibrary::defaults();
  CHECK(build_summary_prompt(lib, 7, 2, 5).text == build_summary_prompt(lib, 7, 2, 5).text);
  // Across paths the selection varies somewhere.
  std::set<std::string> variants;
  for (int path = 0; path < 20; ++path) {
    variants.insert(build_summary_prompt(lib, 7, 0, path).text);
  }
  CHECK(variants.size() > 1);
}

TEST_CASE("single-entry lists always pick those entries") {
  auto lib = PromptLibrary::defaults();
  lib.summary_triggers = {"Only trigger."};
  lib.summary_templates = {"Only template:"};
  for (int round = 0; round < 5; ++round) {
    const auto prompt = build_summary_prompt(lib, 99, round, round);
    CHECK(prompt.trigger == "Only trigger.");
    CHECK(prompt.summary_template == "Only template:");
  }
}

TEST_CASE("peer block labels peers ordinally and hides sender ids") {
  const auto lib = PromptLibrary::defaults();
  const auto block = build_peer_block(lib, {"first insight", "second insight"});
  CHECK(block.find("Peer 1: \"first insight\"") != std::string::npos);
  CHECK(block.find("Peer 2: \"second insight\"") != std::string::npos);
  CHECK(block.find("Peer 3") == std::string::npos);
  CHECK(block.find(lib.peer_open) != std::string::npos);
  CHECK(block.find(lib.peer_close) != std::string::npos);
  CHECK(block.find(lib.reflection_bridge) != std::string::npos);
  // The bridge follows the close tag.
  CHECK(block.find(lib.peer_close) < block.find(lib.reflection_bridge));
}

TEST_CASE("empty routing entry produces no injection") {
  CHECK(build_peer_block(PromptLibrary::defaults(), {}) == "");
}

TEST_CASE("four summaries label Peer 1 through Peer 4 in plan order") {
  const auto lib = PromptLibrary::defaults();
  const auto block = build_peer_block(lib, {"a", "b", "c", "d"});
  const auto p1 = block.find("Peer 1: \"a\"");
  const auto p2 = block.find("Peer 2: \"b\"");
  const auto p3 = block.find("Peer 3: \"c\"");
  const auto p4 = block.find("Peer 4: \"d\"");
  REQUIRE(p1 != std::string::npos);
  REQUIRE(p4 != std::string::npos);
  CHECK(p1 < p2);
  CHECK(p2 < p3);
  CHECK(p3 < p4);
}

TEST_CASE("peer block round-trips through the parser byte-for-byte") {
  const auto lib = PromptLibrary::defaults();
  SplitMix64 rng{31337};
  const std::string glyphs = "abcXYZ 0123,.;:'!?$%(){}";
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> payloads;
    const std::size_t m = 1 + rng.below(6);
    for (std::size_t i = 0; i < m; ++i) {
      std::string p;
      const std::size_t len = rng.below(80);
      for (std::size_t c = 0; c < len; ++c) p += glyphs[rng.below(glyphs.size())];
      payloads.push_back(std::move(p));
    }
    const auto block = build_peer_block(lib, payloads);
    CHECK(parse_peer_block(lib, block) == payloads);
  }
}

TEST_CASE("task instructions are the configured verbatim strings") {
  const auto lib = PromptLibrary::defaults();
  CHECK(task_instruction(lib, TaskKind::Math).find("\\boxed{}") != std::string::npos);
  CHECK(task_instruction(lib, TaskKind::MultipleChoice).find("ANSWER") != std::string::npos);
  auto bare = lib;
  bare.task_prompts.clear();
  CHECK_THROWS_AS((void)task_instruction(bare, TaskKind::Math), ConfigError);
  CHECK_THROWS_AS((void)task_kind_from_string("essay"), ConfigError);
}

TEST_CASE("library validation rejects empty lists and colliding tags") {
  auto lib = PromptLibrary::defaults();
  lib.summary_triggers.clear();
  CHECK_THROWS_AS(lib.validate(), ConfigError);
  lib = PromptLibrary::defaults();
  lib.close_tag = lib.open_tag;
  CHECK_THROWS_AS(lib.validate(), ConfigError);
}

TEST_CASE("library loads overrides from a JSON file") {
  const auto path = std::filesystem::temp_directory_path() / "leap_prompt_lib_test.json";
  {
    std::ofstream out(path);
    out << R"({"summary_triggers": ["Custom trigger."], "reflection_bridge": "Custom bridge."})";
  }
  const auto lib = PromptLibrary::from_json_file(path);
  CHECK(lib.summary_triggers == std::vector<std::string>{"Custom trigger."});
  CHECK(lib.reflection_bridge == "Custom bridge.");
  CHECK(lib.summary_templates.size() == 6);  // defaults retained
  std::filesystem::remove(path);
}
