#pragma once

/**
 * Answer extraction and metrics: Pass@1, consensus voting, accuracy gap,
 * prefix harvesting for fixed-beginning studies, difficulty bucketing,
 * reflection-keyword counting, and the fine-tuning candidate filter.
 *
 * Math answers compare by normalized string equality (trim, strip
 * surrounding $, strip leading zeros on pure integers); no symbolic
 * algebra is attempted.
 */

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "leap/backend.hpp"
#include "leap/prompt_kit.hpp"
#include "leap/transcript.hpp"

namespace leap {

struct ExtractedAnswer {
  std::string raw;
  std::string normalized;
  TaskKind kind = TaskKind::Math;
  bool found = false;
};

/// Normalization applied to both extracted and gold answers.
std::string normalize_answer(std::string_view raw, TaskKind kind);

/// Math: the content of the last balanced \boxed{...}. Multiple choice:
/// the letter of the last "ANSWER": "X" pattern, upper-cased. A missing
/// answer yields found=false (scored incorrect, never a run failure).
ExtractedAnswer extract_answer(std::string_view text, TaskKind kind);

/// Mean correctness indicator. Throws on an empty vector.
double pass_at_1(const std::vector<bool>& correctness);

struct VoteResult {
  std::string answer;   // normalized winner
  bool found = false;   // false when every answer was missing
};

/// Most frequent found answer; ties break by earliest first occurrence.
VoteResult majority_vote(const std::vector<ExtractedAnswer>& answers);

/// Plurality answer preferring, on count ties, the group with the
/// smallest mean response token length (then earliest first occurrence).
VoteResult shortest_majority_vote(const std::vector<ExtractedAnswer>& answers,
                                  const std::vector<std::size_t>& response_tokens);

enum class Polarity { Good, Bad };

/// From one problem's scored transcripts, returns the leading
/// floor(fraction * response tokens) of each response of the requested
/// polarity. Problems lacking both polarities yield an empty list.
std::vector<std::string> harvest_prefixes(const std::vector<Transcript>& transcripts,
                                          const std::string& gold, TaskKind kind,
                                          double fraction, Polarity polarity,
                                          const TokenCounter& counter);

/// Signed accuracy gap: unconstrained minus constrained, positive when
/// fixed beginnings hurt.
double accuracy_gap(double constrained_acc, double unconstrained_acc);

enum class Difficulty { VeryEasy, Easy, Medium, Hard, VeryHard };

const char* to_string(Difficulty level);

/// Buckets a baseline correct count out of 32: 32, 25-31, 9-24, 1-8, 0.
Difficulty difficulty_bucket(int correct_count);

/// Case-insensitive, non-overlapping occurrences of any keyword.
std::size_t count_aha(std::string_view text, const std::vector<std::string>& keywords);

/// Indices of transcripts whose final answer matches gold and whose every
/// round summary stayed strictly under `summary_cap` tokens.
std::vector<std::size_t> filter_sft_candidates(const std::vector<Transcript>& transcripts,
                                               const std::string& gold, TaskKind kind,
                                               std::size_t summary_cap = 256);

}  // namespace leap
