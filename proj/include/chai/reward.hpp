// Linear reward model over hashed n-gram features, trained with the
// Bradley-Terry negative log-likelihood on chosen/rejected pairs.

#ifndef CHAI_REWARD_HPP_
#define CHAI_REWARD_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chai/annotator.hpp"
#include "chai/corpus.hpp"
#include "chai/features.hpp"

namespace chai::reward {

using json = nlohmann::json;

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

struct PreferenceRecord {
  std::string source;
  std::string chosen;
  std::string rejected;
};

struct PreferenceDataset {
  std::vector<PreferenceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Joins pairs with verdicts by pair id. Unresolved verdicts and verdicts
/// without a pair are skipped; canonical label 0 means the canonical first
/// candidate won.
PreferenceDataset build_dataset(const std::vector<corpus::PreferencePair>& pairs,
                                const std::vector<annotator::Verdict>& verdicts);

json to_json(const PreferenceRecord& r);
PreferenceDataset load_dataset(const std::string& path);
void save_dataset(const std::string& path, const PreferenceDataset& d);

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double lr = 0.0;
  double l2 = 0.0;
  std::size_t batch_size = 0;
  std::vector<double> loss_curve;  // loss before training, then after each epoch
};

struct RewardModel {
  std::vector<double> weights;
  features::FeatureExtractor feature_config;
  TrainingMeta training_meta;

  /// Zero-weight model sized to the extractor's hash dimension.
  static RewardModel zeros(features::FeatureExtractor config);

  double score(const std::string& source, const std::string& candidate) const;
};

/// sigmoid(r_chosen - r_rejected), overflow-free.
double bt_probability(double r_chosen, double r_rejected);

/// -log sigmoid(margin), overflow-free.
double neg_log_sigmoid(double margin);

/// Mean Bradley-Terry NLL. Throws chai::Error on an empty dataset.
double bt_nll_loss(const RewardModel& model, const PreferenceDataset& dataset);

/// NLL plus (l2 / 2) * ||w||^2, the quantity bt_gradient differentiates.
double bt_objective(const RewardModel& model, std::span<const PreferenceRecord> batch, double l2);

/// Gradient of bt_objective: mean of sigmoid(r_r - r_c) * (phi_r - phi_c)
/// plus l2 * w. Throws chai::Error on an empty batch.
std::vector<double> bt_gradient(const RewardModel& model, std::span<const PreferenceRecord> batch,
                                double l2 = 0.0);

struct RewardTrainConfig {
  double lr = 1e-4;
  int epochs = 3;
  std::size_t batch_size = 16;  // 0 = full batch
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  bool shuffle = true;
  features::FeatureExtractor features;
};

json to_json(const RewardTrainConfig& c);
RewardTrainConfig reward_train_config_from_json(const json& j);

/// Mini-batch gradient descent on the Bradley-Terry objective from zero
/// weights. Deterministic for a fixed seed. Throws TrainingDiverged if the
/// loss exceeds 10x its initial value.
RewardModel train_reward(const PreferenceDataset& dataset, const RewardTrainConfig& config);

/// Fraction of records where score(chosen) > score(rejected).
double pairwise_accuracy(const RewardModel& model, const PreferenceDataset& dataset);

json to_json(const RewardModel& m);
RewardModel reward_model_from_json(const json& j);
void save_model(const std::string& path, const RewardModel& m);
RewardModel load_model(const std::string& path);

}  // namespace chai::reward

#endif  // CHAI_REWARD_HPP_
