#include "leap/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "leap/errors.hpp"

namespace leap {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool is_pure_integer(const std::string& s) {
  std::size_t i = (s.size() > 1 && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size()) return false;
  return std::all_of(s.begin() + i, s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

/// Content of the last \boxed{...} with balanced braces, or empty.
std::string last_boxed(std::string_view text) {
  static constexpr std::string_view kBox = "\\boxed{";
  std::size_t best = std::string_view::npos;
  std::size_t pos = 0;
  while ((pos = text.find(kBox, pos)) != std::string_view::npos) {
    best = pos;
    ++pos;
  }
  if (best == std::string_view::npos) return "";
  std::size_t i = best + kBox.size();
  int depth = 1;
  std::string content;
  for (; i < text.size(); ++i) {
    if (text[i] == '{') {
      ++depth;
    } else if (text[i] == '}') {
      --depth;
      if (depth == 0) return content;
    }
    content += text[i];
  }
  return "";  // unbalanced: no answer
}

}  // namespace

std::string normalize_answer(std::string_view raw, TaskKind kind) {
  std::string s = trim(raw);
  if (kind == TaskKind::MultipleChoice) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
  }
  // Strip one layer of surrounding $...$.
  if (s.size() >= 2 && s.front() == '$' && s.back() == '$') {
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  }
  if (is_pure_integer(s)) {
    const bool negative = s[0] == '-';
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    while (i + 1 < s.size() && s[i] == '0') ++i;
    s = (negative ? "-" : "") + s.substr(i);
    if (s == "-0") s = "0";
  }
  return s;
}

ExtractedAnswer extract_answer(std::string_view text, TaskKind kind) {
  ExtractedAnswer out;
  out.kind = kind;
  if (kind == TaskKind::Math) {
    out.raw = last_boxed(text);
    if (!out.raw.empty()) {
      out.found = true;
      out.normalized = normalize_answer(out.raw, kind);
    }
    return out;
  }

  // Last "ANSWER": "X" pattern; quotes around the key are optional and
  // the letter is case-normalized to upper.
  static constexpr std::string_view kKey = "ANSWER";
  std::size_t pos = 0;
  while ((pos = text.find(kKey, pos)) != std::string_view::npos) {
    std::size_t i = pos + kKey.size();
    if (i < text.size() && text[i] == '"') ++i;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == ':') {
      ++i;
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i < text.size() && text[i] == '"') ++i;
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        out.raw = std::string(1, text[i]);
        out.found = true;
      }
    }
    pos += kKey.size();
  }
  if (out.found) out.normalized = normalize_answer(out.raw, kind);
  return out;
}

double pass_at_1(const std::vector<bool>& correctness) {
  if (correctness.empty()) throw std::invalid_argument("pass_at_1: empty correctness vector");
  const auto correct = std::count(correctness.begin(), correctness.end(), true);
  return static_cast<double>(correct) / static_cast<double>(correctness.size());
}

VoteResult majority_vote(const std::vector<ExtractedAnswer>& answers) {
  if (answers.empty()) throw std::invalid_argument("majority_vote: empty answer list");
  std::vector<std::string> order;  // distinct answers by first occurrence
  std::map<std::string, int> counts;
  for (const auto& a : answers) {
    if (!a.found) continue;
    if (counts.emplace(a.normalized, 0).second) order.push_back(a.normalized);
    ++counts[a.normalized];
  }
  VoteResult out;
  if (order.empty()) return out;  // every answer missing: the vote fails
  int best = 0;
  for (const auto& candidate : order) {
    if (counts[candidate] > best) {
      best = counts[candidate];
      out.answer = candidate;
    }
  }
  out.found = true;
  return out;
}

VoteResult shortest_majority_vote(const std::vector<ExtractedAnswer>& answers,
                                  const std::vector<std::size_t>& response_tokens) {
  if (answers.empty()) throw std::invalid_argument("shortest_majority_vote: empty answer list");
  if (answers.size() != response_tokens.size()) {
    throw std::invalid_argument("shortest_majority_vote: length mismatch");
  }
  struct Group {
    int count = 0;
    double token_sum = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i].found) continue;
    if (groups.emplace(answers[i].normalized, Group{}).second) {
      order.push_back(answers[i].normalized);
    }
    auto& g = groups[answers[i].normalized];
    ++g.count;
    g.token_sum += static_cast<double>(response_tokens[i]);
  }
  VoteResult out;
  if (order.empty()) return out;
  double best_mean = 0;
  int best_count = 0;
  for (const auto& candidate : order) {
    const auto& g = groups[candidate];
    const double mean = g.token_sum / g.count;
    if (g.count > best_count || (g.count == best_count && mean < best_mean)) {
      best_count = g.count;
      best_mean = mean;
      out.answer = candidate;
    }
  }
  out.found = true;
  return out;
}

std::vector<std::string> harvest_prefixes(const std::vector<Transcript>& transcripts,
                                          const std::string& gold, TaskKind kind,
                                          double fraction, Polarity polarity,
                                          const TokenCounter& counter) {
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw std::invalid_argument("harvest_prefixes: fraction must be in (0,1)");
  }
  const std::string gold_norm = normalize_answer(gold, kind);
  std::vector<bool> correct(transcripts.size());
  bool any_correct = false, any_incorrect = false;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto answer = extract_answer(transcripts[i].response_text(), kind);
    correct[i] = answer.found && answer.normalized == gold_norm;
    (correct[i] ? any_correct : any_incorrect) = true;
  }
  // Only problems with both correct and incorrect outputs qualify.
  if (!any_correct || !any_incorrect) return {};

  std::vector<std::string> prefixes;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    if (correct[i] != (polarity == Polarity::Good)) continue;
    const std::string response = transcripts[i].response_text();
    const auto total = counter.count_tokens(response);
    const auto keep = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(total)));
    if (keep == 0) continue;
    prefixes.push_back(counter.token_prefix(response, keep));
  }
  return prefixes;
}

double accuracy_gap(double constrained_acc, double unconstrained_acc) {
  return unconstrained_acc - constrained_acc;
}

const char* to_string(Difficulty level) {
  switch (level) {
    case Difficulty::VeryEasy: return "very_easy";
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
    case Difficulty::VeryHard: return "very_hard";
  }
  return "medium";
}

Difficulty difficulty_bucket(int correct_count) {
  if (correct_count < 0 || correct_count > 32) {
    throw std::invalid_argument("difficulty_bucket: count must be in [0,32]");
  }
  if (correct_count == 32) return Difficulty::VeryEasy;
  if (correct_count >= 25) return Difficulty::Easy;
  if (correct_count >= 9) return Difficulty::Medium;
  if (correct_count >= 1) return Difficulty::Hard;
  return Difficulty::VeryHard;
}

std::size_t count_aha(std::string_view text, const std::vector<std::string>& keywords) {
  if (keywords.empty()) throw ConfigError("count_aha: empty keyword list");
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  std::vector<std::string> needles;
  for (const auto& k : keywords) {
    std::string n(k);
    std::transform(n.begin(), n.end(), n.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (!n.empty()) needles.push_back(std::move(n));
  }
  if (needles.empty()) throw ConfigError("count_aha: empty keyword list");

  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < lower.size()) {
    std::size_t best_at = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& n : needles) {
      const std::size_t at = lower.find(n, pos);
      if (at == std::string::npos) continue;
      // Earliest match wins; at equal positions prefer the longest.
      if (at < best_at || (at == best_at && n.size() > best_len)) {
        best_at = at;
        best_len = n.size();
      }
    }
    if (best_at == std::string::npos) break;
    ++count;
    pos = best_at + best_len;  // non-overlapping
  }
  return count;
}

std::vector<std::size_t> filter_sft_candidates(const std::vector<Transcript>& transcripts,
                                               const std::string& gold, TaskKind kind,
                                               std::size_t summary_cap) {
  const std::string gold_norm = normalize_answer(gold, kind);
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    const auto answer = extract_answer(transcripts[i].response_text(), kind);
    if (!answer.found || answer.normalized != gold_norm) continue;
    const bool summaries_ok =
        std::all_of(transcripts[i].rounds.begin(), transcripts[i].rounds.end(),
                    [&](const LeapRoundRecord& r) { return r.own.token_count < summary_cap; });
    if (summaries_ok) accepted.push_back(i);
  }
  return accepted;
}

}  // namespace leap
