#include "chai/classification.hpp"

#include <set>

#include "chai/text.hpp"

namespace chai::metrics {

ClassificationReport classification_metrics(const std::vector<std::string>& predictions,
                                            const std::vector<std::string>& golds,
                                            const std::vector<std::string>& label_set) {
  if (predictions.size() != golds.size()) {
    throw Error("classification_metrics: " + std::to_string(predictions.size()) + " predictions vs " +
                std::to_string(golds.size()) + " golds");
  }
  if (golds.empty()) throw Error("classification_metrics: no examples");
  const std::set<std::string> labels(label_set.begin(), label_set.end());
  auto check = [&](const std::string& l) {
    if (!labels.count(l)) throw Error("classification_metrics: unknown label '" + l + "'");
  };

  std::map<std::string, std::size_t> tp, pred_count, gold_count;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    check(predictions[i]);
    check(golds[i]);
    ++pred_count[predictions[i]];
    ++gold_count[golds[i]];
    if (predictions[i] == golds[i]) {
      ++correct;
      ++tp[golds[i]];
    }
  }

  ClassificationReport r;
  r.n = golds.size();
  const auto n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(correct) / n;
  for (const auto& l : labels) {
    ClassStats s;
    s.support = gold_count[l];
    const auto t = static_cast<double>(tp[l]);
    if (pred_count[l] > 0) s.precision = t / static_cast<double>(pred_count[l]);
    if (s.support > 0) s.recall = t / static_cast<double>(s.support);
    if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
    r.weighted_f1 += static_cast<double>(s.support) / n * s.f1;
    r.per_class[l] = s;
  }
  return r;
}

nlohmann::json to_json(const ClassificationReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [l, s] : r.per_class) {
    per[l] = {{"support", s.support}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return {{"accuracy", r.accuracy}, {"weighted_f1", r.weighted_f1}, {"n", r.n}, {"per_class", per}};
}

}  // namespace chai::metrics
