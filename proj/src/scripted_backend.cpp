#include "leap/scripted_backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "leap/errors.hpp"

namespace leap {

namespace {

struct TokenSpan {
  std::size_t begin;
  std::size_t end;  // one past the last byte of the word
};

std::vector<TokenSpan> token_spans(std::string_view text) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    const std::size_t begin = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    spans.push_back({begin, i});
  }
  return spans;
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& message) {
  throw ConfigError("scripted program line " + std::to_string(line_no) + ": " + message);
}

}  // namespace

ScriptedProgram parse_scripted_program(const std::string& text) {
  auto set = parse_scripted_file(text);
  if (!set.per_stream.empty()) {
    throw ConfigError("scripted program: sections not allowed here, use parse_scripted_file");
  }
  return set.fallback.value_or(ScriptedProgram{});
}

ScriptedProgramSet parse_scripted_file(const std::string& text) {
  ScriptedProgramSet set;
  ScriptedProgram* current = nullptr;
  const auto fallback_program = [&]() -> ScriptedProgram* {
    if (!set.fallback) set.fallback.emplace();
    return &*set.fallback;
  };

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(line_no, "unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.rfind("path", 0) != 0) parse_fail(line_no, "expected [path N] or [path *]");
      const std::string arg = trim(inner.substr(4));
      if (arg == "*") {
        current = fallback_program();
      } else {
        try {
          current = &set.per_stream[std::stoi(arg)];
        } catch (const std::exception&) {
          parse_fail(line_no, "invalid path index: " + arg);
        }
      }
      continue;
    }

    ScriptedProgram* target = current ? current : fallback_program();
    std::istringstream ls(line);
    std::string op;
    ls >> op;
    ScriptedOp instr;
    if (op == "emit") {
      instr.kind = ScriptedOp::Kind::Emit;
      std::string rest;
      std::getline(ls, rest);
      instr.tokens = split_words(rest);
      if (instr.tokens.empty()) parse_fail(line_no, "emit requires text");
    } else if (op == "when" || op == "unless") {
      instr.kind = op == "when" ? ScriptedOp::Kind::When : ScriptedOp::Kind::Unless;
      std::string emit_kw;
      ls >> instr.marker >> emit_kw;
      if (instr.marker.empty() || emit_kw != "emit") {
        parse_fail(line_no, op + " requires: " + op + " <MARKER> emit <text>");
      }
      std::string rest;
      std::getline(ls, rest);
      instr.tokens = split_words(rest);
      if (instr.tokens.empty()) parse_fail(line_no, op + " requires text after emit");
    } else if (op == "eos") {
      instr.kind = ScriptedOp::Kind::Eos;
    } else {
      parse_fail(line_no, "unknown instruction: " + op);
    }
    target->ops.push_back(std::move(instr));
  }
  return set;
}

ScriptedBackend::ScriptedBackend(ScriptedProgramSet programs) : programs_(std::move(programs)) {}

ScriptedBackend::ScriptedBackend(ScriptedProgram shared) {
  programs_.fallback = std::move(shared);
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scripted program file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ScriptedBackend(parse_scripted_file(buf.str()));
}

const ScriptedProgram& ScriptedBackend::program_for(const std::optional<int>& stream_id) const {
  if (stream_id) {
    const auto it = programs_.per_stream.find(*stream_id);
    if (it != programs_.per_stream.end()) return it->second;
  }
  if (programs_.fallback) return *programs_.fallback;
  throw ConfigError("scripted backend: no program for stream " +
                    (stream_id ? std::to_string(*stream_id) : std::string("<unset>")));
}

std::size_t ScriptedBackend::count_tokens(std::string_view text) const {
  return token_spans(text).size();
}

std::string ScriptedBackend::token_prefix(std::string_view text, std::size_t max_tokens) const {
  if (max_tokens == 0) return "";
  const auto spans = token_spans(text);
  if (max_tokens >= spans.size()) return std::string(text);
  return std::string(text.substr(0, spans[max_tokens - 1].end));
}

GenerationResult ScriptedBackend::generate(std::string_view context, std::size_t budget_tokens,
                                           const GenerationConfig& config,
                                           const ChunkSink& sink) {
  if (budget_tokens < 1) throw std::invalid_argument("generate: budget must be >= 1");
  if (context.empty()) throw std::invalid_argument("generate: context must be non-empty");

  const ScriptedProgram& program = program_for(config.stream_id);
  const std::string ctx(context);

  // Conditioned emission stream for this call.
  std::vector<const ScriptedOp*> stream;
  for (const auto& op : program.ops) {
    switch (op.kind) {
      case ScriptedOp::Kind::Emit:
        stream.push_back(&op);
        break;
      case ScriptedOp::Kind::When:
        if (ctx.find(op.marker) != std::string::npos) stream.push_back(&op);
        break;
      case ScriptedOp::Kind::Unless:
        if (ctx.find(op.marker) == std::string::npos) stream.push_back(&op);
        break;
      case ScriptedOp::Kind::Eos:
        goto stream_built;  // instructions past a forced eos are unreachable
    }
  }
stream_built:

  // Rediscover the stream position: sequentially match each op's words
  // against the context, allowing a mid-op cut at the frontier.
  const auto ctx_spans = token_spans(ctx);
  const auto ctx_word = [&](std::size_t i) {
    return ctx.substr(ctx_spans[i].begin, ctx_spans[i].end - ctx_spans[i].begin);
  };
  std::size_t cursor = 0;
  std::size_t start_op = stream.size();
  std::size_t start_word = 0;
  for (std::size_t oi = 0; oi < stream.size(); ++oi) {
    const auto& words = stream[oi]->tokens;
    std::size_t j = cursor;
    while (j < ctx_spans.size() && ctx_word(j) != words[0]) ++j;
    if (j == ctx_spans.size()) {
      start_op = oi;
      start_word = 0;
      break;
    }
    std::size_t matched = 0;
    while (matched < words.size() && j + matched < ctx_spans.size() &&
           ctx_word(j + matched) == words[matched]) {
      ++matched;
    }
    cursor = j + matched;
    if (matched < words.size()) {
      start_op = oi;
      start_word = matched;
      break;
    }
  }

  // Emit token by token into one buffer; the call delivers a single chunk.
  GenerationResult result;
  result.finish = FinishReason::EndOfSequence;
  std::size_t emitted = 0;
  std::size_t max_stop = 0;
  for (const auto& s : config.stop_sequences) max_stop = std::max(max_stop, s.size());

  for (std::size_t oi = start_op; oi < stream.size() && result.finish == FinishReason::EndOfSequence;
       ++oi) {
    const auto& words = stream[oi]->tokens;
    for (std::size_t wi = (oi == start_op ? start_word : 0); wi < words.size(); ++wi) {
      if (emitted == budget_tokens) {
        result.finish = FinishReason::Budget;
        break;
      }
      const std::string piece = " " + words[wi];
      result.text += piece;
      ++emitted;

      // Stop sequences may span token boundaries; scan the fresh tail.
      const std::size_t from = result.text.size() > piece.size() + max_stop
                                   ? result.text.size() - piece.size() - max_stop
                                   : 0;
      for (const auto& stop : config.stop_sequences) {
        if (stop.empty()) continue;
        const std::size_t at = result.text.find(stop, from);
        if (at == std::string::npos) continue;
        // The matched sequence is reported but excluded from the text.
        result.text.resize(at);
        result.finish = FinishReason::StopSequence;
        result.matched_stop = stop;
        break;
      }
      if (result.finish != FinishReason::EndOfSequence) break;
    }
  }

  result.token_count =
      result.finish == FinishReason::StopSequence ? count_tokens(result.text) : emitted;
  if (sink) {
    GenerationChunk chunk;
    chunk.text = result.text;
    chunk.token_count = result.token_count;
    chunk.finish = result.finish;
    chunk.matched_stop = result.matched_stop;
    sink(chunk);
  }
  return result;
}

}  // namespace leap
