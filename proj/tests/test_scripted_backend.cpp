#include <doctest.h>

#include <vector>

#include "leap/errors.hpp"
#include "leap/scripted_backend.hpp"

using namespace leap;

namespace {

GenerationConfig plain_config() {
  GenerationConfig cfg;
  cfg.stream_id = 0;
  return cfg;
}

}  // namespace

TEST_CASE("a literal program emits one chunk and ends the sequence") {
  ScriptedBackend backend(parse_scripted_program("emit a b c\neos\n"));
  std::vector<GenerationChunk> chunks;
  const auto res = backend.generate("question:", 100, plain_config(),
                                    [&](const GenerationChunk& c) { chunks.push_back(c); });
  CHECK(res.text == " a b c");
  CHECK(res.token_count == 3);
  CHECK(res.finish == FinishReason::EndOfSequence);
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == res.text);
}

TEST_CASE("budget cuts the stream token-exactly") {
  ScriptedBackend backend(parse_scripted_program("emit t1 t2 t3 t4 t5 t6 t7 t8 t9 t10\n"));
  const auto res = backend.generate("q:", 5, plain_config());
  CHECK(res.token_count == 5);
  CHECK(res.text == " t1 t2 t3 t4 t5");
  CHECK(res.finish == FinishReason::Budget);
}

TEST_CASE("stop sequences truncate before the match and report it") {
  ScriptedBackend backend(
      parse_scripted_program("emit summary of work </summarize> hidden tail\n"));
  auto cfg = plain_config();
  cfg.stop_sequences = {"</summarize>"};
  const auto res = backend.generate("q:", 100, cfg);
  CHECK(res.text == " summary of work");
  CHECK(res.finish == FinishReason::StopSequence);
  CHECK(res.matched_stop == "</summarize>");
  CHECK(res.token_count == 3);
}

TEST_CASE("resume composability: two calls equal one combined call") {
  const auto program = parse_scripted_program("emit step one done\nemit step two done\neos\n");
  ScriptedBackend backend(program);
  const std::string context = "solve it:";

  const auto full = backend.generate(context, 6, plain_config());
  const auto part1 = backend.generate(context, 4, plain_config());
  const auto part2 = backend.generate(context + part1.text, 2, plain_config());
  CHECK(part1.text + part2.text == full.text);

  // Resuming after everything yields an immediate end of sequence.
  const auto done = backend.generate(context + full.text, 5, plain_config());
  CHECK(done.text.empty());
  CHECK(done.finish == FinishReason::EndOfSequence);
}

TEST_CASE("conditional emission keys on context markers") {
  const auto program = parse_scripted_program(
      "emit thinking hard\n"
      "when HINT emit answer 42\n"
      "unless HINT emit answer 13\n"
      "eos\n");
  ScriptedBackend backend(program);

  const auto without = backend.generate("plain question", 100, plain_config());
  CHECK(without.text == " thinking hard answer 13");

  const auto with = backend.generate("question mentioning HINT", 100, plain_config());
  CHECK(with.text == " thinking hard answer 42");
}

TEST_CASE("a marker arriving mid-stream redirects the continuation") {
  const auto program = parse_scripted_program(
      "emit first part\n"
      "when HINT emit fixed ending\n"
      "unless HINT emit broken ending\n");
  ScriptedBackend backend(program);
  const std::string context = "q:";

  const auto part1 = backend.generate(context, 2, plain_config());
  CHECK(part1.text == " first part");
  // An injected block adds the marker before the path resumes.
  const auto part2 =
      backend.generate(context + part1.text + "\n[peer says HINT]\n", 100, plain_config());
  CHECK(part2.text == " fixed ending");
}

TEST_CASE("identical inputs yield identical chunk sequences") {
  ScriptedBackend backend(parse_scripted_program("emit a b c d e\nemit f g\neos\n"));
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = backend.generate("ctx", 4, plain_config());
    const auto b = backend.generate("ctx", 4, plain_config());
    CHECK(a.text == b.text);
    CHECK(a.finish == b.finish);
    CHECK(a.token_count == b.token_count);
  }
}

TEST_CASE("forced prefixes resume the stream mid-way") {
  ScriptedBackend backend(parse_scripted_program("emit alpha beta gamma delta\neos\n"));
  // The prefix is the first half of the program's own emission.
  const auto res = backend.generate("q: alpha beta", 100, plain_config());
  CHECK(res.text == " gamma delta");
}

TEST_CASE("per-path sections select programs by stream id") {
  const auto set = parse_scripted_file(
      "[path 0]\nemit from zero\neos\n"
      "[path 1]\nemit from one\neos\n"
      "[path *]\nemit from fallback\neos\n");
  ScriptedBackend backend(set);
  GenerationConfig cfg;
  cfg.stream_id = 0;
  CHECK(backend.generate("q", 10, cfg).text == " from zero");
  cfg.stream_id = 1;
  CHECK(backend.generate("q", 10, cfg).text == " from one");
  cfg.stream_id = 7;
  CHECK(backend.generate("q", 10, cfg).text == " from fallback");
}

TEST_CASE("token accounting counts whitespace-delimited words") {
  ScriptedBackend backend{ScriptedProgram{}};
  CHECK(backend.count_tokens("") == 0);
  CHECK(backend.count_tokens("a b c") == 3);
  CHECK(backend.count_tokens("  spaced   out\nwords\t here ") == 4);
  CHECK(backend.count_tokens("one") + backend.count_tokens(" two three") ==
        backend.count_tokens("one two three"));

  CHECK(backend.token_prefix(" a b c", 2) == " a b");
  CHECK(backend.token_prefix("a b c", 0) == "");
  CHECK(backend.token_prefix("a b", 9) == "a b");
}

TEST_CASE("parser reports line numbers on malformed programs") {
  CHECK_THROWS_WITH_AS((void)parse_scripted_program("emit ok\nbogus op\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS((void)parse_scripted_program("when MARK something\n"), ConfigError);
  CHECK_THROWS_AS((void)parse_scripted_program("emit\n"), ConfigError);
}

TEST_CASE("generate validates its preconditions") {
  ScriptedBackend backend(parse_scripted_program("emit x\n"));
  CHECK_THROWS_AS((void)backend.generate("", 5, plain_config()), std::invalid_argument);
  CHECK_THROWS_AS((void)backend.generate("ctx", 0, plain_config()), std::invalid_argument);
}
