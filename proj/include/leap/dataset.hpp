#pragma once

/**
 * Benchmark ingestion: line-delimited JSON records with fields
 * id, question, answer, kind. Order is preserved; malformed lines and
 * duplicate ids are configuration errors naming the offender.
 */

#include <filesystem>
#include <string>
#include <vector>

#include "leap/prompt_kit.hpp"

namespace leap {

struct ProblemRecord {
  std::string id;
  std::string question;
  std::string gold_answer;
  TaskKind kind = TaskKind::Math;
};

std::vector<ProblemRecord> load_dataset(const std::filesystem::path& path);

}  // namespace leap
