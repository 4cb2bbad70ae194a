// Accuracy and support-weighted F1 over a closed label set.

#ifndef CHAI_CLASSIFICATION_HPP_
#define CHAI_CLASSIFICATION_HPP_

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace chai::metrics {

struct ClassStats {
  std::size_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;  // 0 when precision + recall = 0
};

struct ClassificationReport {
  double accuracy = 0.0;
  double weighted_f1 = 0.0;
  std::size_t n = 0;
  std::map<std::string, ClassStats> per_class;
};

inline const std::vector<std::string> kSentimentLabels{"negative", "neutral", "positive"};

/// Throws chai::Error on a length mismatch, an empty input or a label
/// outside label_set.
ClassificationReport classification_metrics(const std::vector<std::string>& predictions,
                                            const std::vector<std::string>& golds,
                                            const std::vector<std::string>& label_set = kSentimentLabels);

nlohmann::json to_json(const ClassificationReport& r);

}  // namespace chai::metrics

#endif  // CHAI_CLASSIFICATION_HPP_
