// Slot for sentence scores produced outside this tool (e.g. a neural metric
// run separately): a JSONL sidecar of {item_id, score}.

#ifndef CHAI_EXTERNAL_SCORES_HPP_
#define CHAI_EXTERNAL_SCORES_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chai::metrics {

/// Throws chai::Error on malformed lines or duplicate item ids.
std::map<std::string, double> load_external_scores(const std::string& path);

struct ExternalSummary {
  std::optional<double> mean;  // over items that have a score
  std::size_t scored = 0;
  std::vector<std::string> missing;
};

ExternalSummary summarize_external(const std::map<std::string, double>& scores,
                                   const std::vector<std::string>& item_ids);

}  // namespace chai::metrics

#endif  // CHAI_EXTERNAL_SCORES_HPP_
