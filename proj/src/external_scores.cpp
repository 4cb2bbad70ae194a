#include "chai/external_scores.hpp"

#include "chai/jsonl.hpp"
#include "chai/text.hpp"

namespace chai::metrics {

std::map<std::string, double> load_external_scores(const std::string& path) {
  std::map<std::string, double> out;
  jsonl::for_each(path, [&](std::size_t line_no, const nlohmann::json& j) {
    std::string id;
    double score = 0.0;
    try {
      id = j.at("item_id").get<std::string>();
      score = j.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!out.emplace(id, score).second) {
      throw Error(path + ":" + std::to_string(line_no) + ": duplicate item_id '" + id + "'");
    }
  });
  return out;
}

ExternalSummary summarize_external(const std::map<std::string, double>& scores,
                                   const std::vector<std::string>& item_ids) {
  ExternalSummary s;
  double total = 0.0;
  for (const auto& id : item_ids) {
    auto it = scores.find(id);
    if (it == scores.end()) {
      s.missing.push_back(id);
      continue;
    }
    total += it->second;
    ++s.scored;
  }
  if (s.scored > 0) s.mean = total / static_cast<double>(s.scored);
  return s;
}

}  // namespace chai::metrics
