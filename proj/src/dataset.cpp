#include "leap/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "leap/errors.hpp"

namespace leap {

std::vector<ProblemRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset: " + path.string());

  std::vector<ProblemRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed record: " + e.what());
    }
    ProblemRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.question = j.at("question").get<std::string>();
      rec.gold_answer = j.at("answer").get<std::string>();
      rec.kind = task_kind_from_string(j.value("kind", "math"));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": missing or invalid field: " + e.what());
    }
    if (rec.gold_answer.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty answer");
    }
    if (rec.question.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty question");
    }
    if (!seen.insert(rec.id).second) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": duplicate id: " + rec.id);
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ConfigError("dataset is empty: " + path.string());
  return records;
}

}  // namespace leap
