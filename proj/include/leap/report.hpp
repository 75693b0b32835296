#pragma once

/**
 * Metric reports computed over transcripts: per-problem and aggregate
 * Pass@1, consensus voting, token ledgers, reflection counts, difficulty
 * tables, and accuracy gaps for fixed-beginning experiments.
 */

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "leap/dataset.hpp"
#include "leap/evaluation.hpp"
#include "leap/transcript.hpp"

namespace leap {

struct PathEval {
  int path_id = 0;
  PathStatus status = PathStatus::Finished;
  ExtractedAnswer answer;
  bool correct = false;
  std::size_t generated_tokens = 0;
  std::size_t injected_tokens = 0;
  std::size_t summary_tokens = 0;
  std::size_t aha_count = 0;
};

struct RepEval {
  double pass_at_1 = 0.0;
  VoteResult majority;
  bool majority_correct = false;
  VoteResult shortest;
  bool shortest_correct = false;
  std::vector<PathEval> paths;
};

struct ProblemEval {
  std::string problem_id;
  std::vector<RepEval> reps;
  bool failed = false;  // a rep could not run at all
  double mean_pass_at_1 = 0.0;
  double cons_rate = 0.0;      // fraction of reps whose majority vote is correct
  double shortest_rate = 0.0;  // same for shortest-majority voting
  double mean_generated_tokens = 0.0;
  double mean_injected_tokens = 0.0;
  double mean_summary_tokens = 0.0;
  double mean_aha = 0.0;
};

struct SubRunReport {
  std::string name;
  std::vector<ProblemEval> problems;
  double pass_at_1 = 0.0;  // unweighted mean over problems
  double cons_rate = 0.0;
  double shortest_rate = 0.0;
  double mean_generated_tokens = 0.0;
  double mean_injected_tokens = 0.0;
  double mean_summary_tokens = 0.0;
  double mean_aha = 0.0;
};

struct TrapProblemRow {
  std::string problem_id;
  double unconstrained_acc = 0.0;
  double constrained_acc = 0.0;
  double gap = 0.0;  // unconstrained - constrained
  int prefixes_used = 0;
};

struct TrapSummary {
  std::vector<TrapProblemRow> problems;
  double mean_gap = 0.0;
  int requested_questions = 0;
  int used_questions = 0;  // shortfall when fewer qualify
};

struct ToleranceRow {
  int good_count = 0;
  std::string mode;
  double pass_at_1 = 0.0;
};

struct SweepRow {
  std::string param;  // "T" or "k"
  std::size_t value = 0;
  double pass_at_1 = 0.0;
  double mean_generated_tokens = 0.0;
};

struct DifficultyRow {
  Difficulty level = Difficulty::Medium;
  int problem_count = 0;
  double pass_at_1 = 0.0;
  double mean_generated_tokens = 0.0;  // summaries excluded by ledger design
};

struct ExperimentReport {
  std::string experiment_kind;
  std::vector<SubRunReport> subruns;
  std::optional<TrapSummary> trap;
  std::vector<ToleranceRow> tolerance;
  std::vector<SweepRow> sweep;
  std::vector<DifficultyRow> difficulty;
  bool any_problem_failed = false;
};

/// Evaluates one problem's repetitions. `reps[r]` holds the N transcripts
/// of repetition r; reps that failed to run are flagged by `rep_failed`.
ProblemEval evaluate_problem(const ProblemRecord& record,
                             const std::vector<std::vector<Transcript>>& reps,
                             const std::vector<bool>& rep_failed,
                             const std::vector<std::string>& aha_keywords);

SubRunReport aggregate_subrun(std::string name, std::vector<ProblemEval> problems);

/// Difficulty table: buckets from a baseline run's correct counts, rows
/// evaluated over `evaluated` problems matched by id.
std::vector<DifficultyRow> difficulty_table(
    const std::map<std::string, int>& baseline_correct_counts,
    const std::vector<ProblemEval>& evaluated);

}  // namespace leap
