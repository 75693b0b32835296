#pragma once

/**
 * Deterministic scripted generation backend: the desk-scale stand-in for
 * a real reasoning model. A program is a list of instructions in a
 * line-oriented text format (see docs/scripted_programs.md):
 *
 *   emit <text>              emit the words of <text>
 *   when <MARKER> emit <text>    emit only if the context contains MARKER
 *   unless <MARKER> emit <text>  emit only if the context lacks MARKER
 *   eos                      force end of sequence
 *   [path N] / [path *]      section headers assigning programs to streams
 *
 * Tokens are whitespace-delimited words; each emitted token is prefixed
 * with a single space. Output is a pure function of (program, context,
 * config): the backend rediscovers its stream position by matching the
 * program's emission, token by token, against the supplied context, so
 * interleaved injected blocks and forced prefixes resume correctly.
 */

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leap/backend.hpp"

namespace leap {

struct ScriptedOp {
  enum class Kind { Emit, When, Unless, Eos };
  Kind kind = Kind::Emit;
  std::string marker;               // When / Unless
  std::vector<std::string> tokens;  // emission words
};

struct ScriptedProgram {
  std::vector<ScriptedOp> ops;
};

/// Parses a single sectionless program. Errors name the line number.
ScriptedProgram parse_scripted_program(const std::string& text);

struct ScriptedProgramSet {
  std::map<int, ScriptedProgram> per_stream;
  std::optional<ScriptedProgram> fallback;  // [path *]
};

/// Parses a program file with optional [path N] sections; a sectionless
/// file becomes the fallback program for every stream.
ScriptedProgramSet parse_scripted_file(const std::string& text);

class ScriptedBackend final : public TextBackend {
 public:
  explicit ScriptedBackend(ScriptedProgramSet programs);
  explicit ScriptedBackend(ScriptedProgram shared);  // one program, all streams

  static ScriptedBackend from_file(const std::string& path);

  GenerationResult generate(std::string_view context, std::size_t budget_tokens,
                            const GenerationConfig& config,
                            const ChunkSink& sink = nullptr) override;

  std::size_t count_tokens(std::string_view text) const override;
  std::string token_prefix(std::string_view text, std::size_t max_tokens) const override;

 private:
  const ScriptedProgram& program_for(const std::optional<int>& stream_id) const;

  ScriptedProgramSet programs_;
};

}  // namespace leap
