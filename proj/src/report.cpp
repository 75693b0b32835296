#include "leap/report.hpp"

#include <algorithm>
#include <numeric>

namespace leap {

namespace {

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

ProblemEval evaluate_problem(const ProblemRecord& record,
                             const std::vector<std::vector<Transcript>>& reps,
                             const std::vector<bool>& rep_failed,
                             const std::vector<std::string>& aha_keywords) {
  ProblemEval out;
  out.problem_id = record.id;
  const std::string gold = normalize_answer(record.gold_answer, record.kind);

  std::vector<double> pass_values, cons_values, shortest_values;
  std::vector<double> gen_tokens, inj_tokens, sum_tokens, aha_values;

  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (r < rep_failed.size() && rep_failed[r]) {
      out.failed = true;
      continue;
    }
    const auto& transcripts = reps[r];
    if (transcripts.empty()) {
      out.failed = true;
      continue;
    }
    RepEval rep;
    std::vector<bool> correctness;
    std::vector<ExtractedAnswer> answers;
    std::vector<std::size_t> response_tokens;
    for (const auto& t : transcripts) {
      PathEval p;
      p.path_id = t.path_id;
      p.status = t.status;
      p.answer = extract_answer(t.response_text(), record.kind);
      p.correct = p.answer.found && p.answer.normalized == gold;
      p.generated_tokens = t.generated_tokens;
      p.injected_tokens = t.injected_tokens;
      p.summary_tokens = t.summary_tokens;
      p.aha_count = aha_keywords.empty() ? 0 : count_aha(t.model_text(), aha_keywords);

      correctness.push_back(p.correct);
      answers.push_back(p.answer);
      response_tokens.push_back(t.generated_tokens + t.summary_tokens);
      gen_tokens.push_back(static_cast<double>(p.generated_tokens));
      inj_tokens.push_back(static_cast<double>(p.injected_tokens));
      sum_tokens.push_back(static_cast<double>(p.summary_tokens));
      aha_values.push_back(static_cast<double>(p.aha_count));
      rep.paths.push_back(std::move(p));
    }
    rep.pass_at_1 = pass_at_1(correctness);
    rep.majority = majority_vote(answers);
    rep.majority_correct = rep.majority.found && rep.majority.answer == gold;
    rep.shortest = shortest_majority_vote(answers, response_tokens);
    rep.shortest_correct = rep.shortest.found && rep.shortest.answer == gold;

    pass_values.push_back(rep.pass_at_1);
    cons_values.push_back(rep.majority_correct ? 1.0 : 0.0);
    shortest_values.push_back(rep.shortest_correct ? 1.0 : 0.0);
    out.reps.push_back(std::move(rep));
  }

  out.mean_pass_at_1 = mean_of(pass_values);
  out.cons_rate = mean_of(cons_values);
  out.shortest_rate = mean_of(shortest_values);
  out.mean_generated_tokens = mean_of(gen_tokens);
  out.mean_injected_tokens = mean_of(inj_tokens);
  out.mean_summary_tokens = mean_of(sum_tokens);
  out.mean_aha = mean_of(aha_values);
  return out;
}

SubRunReport aggregate_subrun(std::string name, std::vector<ProblemEval> problems) {
  SubRunReport out;
  out.name = std::move(name);
  std::vector<double> pass, cons, shortest, gen, inj, sum, aha;
  for (const auto& p : problems) {
    pass.push_back(p.mean_pass_at_1);
    cons.push_back(p.cons_rate);
    shortest.push_back(p.shortest_rate);
    gen.push_back(p.mean_generated_tokens);
    inj.push_back(p.mean_injected_tokens);
    sum.push_back(p.mean_summary_tokens);
    aha.push_back(p.mean_aha);
  }
  out.pass_at_1 = mean_of(pass);
  out.cons_rate = mean_of(cons);
  out.shortest_rate = mean_of(shortest);
  out.mean_generated_tokens = mean_of(gen);
  out.mean_injected_tokens = mean_of(inj);
  out.mean_summary_tokens = mean_of(sum);
  out.mean_aha = mean_of(aha);
  out.problems = std::move(problems);
  return out;
}

std::vector<DifficultyRow> difficulty_table(
    const std::map<std::string, int>& baseline_correct_counts,
    const std::vector<ProblemEval>& evaluated) {
  std::map<Difficulty, std::vector<const ProblemEval*>> buckets;
  for (const auto& p : evaluated) {
    const auto it = baseline_correct_counts.find(p.problem_id);
    if (it == baseline_correct_counts.end()) continue;
    buckets[difficulty_bucket(it->second)].push_back(&p);
  }
  std::vector<DifficultyRow> rows;
  for (const Difficulty level : {Difficulty::VeryEasy, Difficulty::Easy, Difficulty::Medium,
                                 Difficulty::Hard, Difficulty::VeryHard}) {
    const auto it = buckets.find(level);
    DifficultyRow row;
    row.level = level;
    if (it != buckets.end()) {
      row.problem_count = static_cast<int>(it->second.size());
      double pass = 0.0, gen = 0.0;
      for (const ProblemEval* p : it->second) {
        pass += p->mean_pass_at_1;
        gen += p->mean_generated_tokens;
      }
      row.pass_at_1 = pass / row.problem_count;
      row.mean_generated_tokens = gen / row.problem_count;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace leap
