// Candidate re-ranking policy: a softmax over theta . phi(source, candidate)
// on a finite candidate set, optimized against the reward model with a
// KL-regularized objective (clipped PPO or its exact gradient) or with DPO.

#ifndef CHAI_POLICY_HPP_
#define CHAI_POLICY_HPP_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chai/features.hpp"
#include "chai/reward.hpp"
#include "chai/rng.hpp"

namespace chai::policy {

using json = nlohmann::json;

struct CandidateSet {
  std::string source;
  std::vector<std::string> candidates;

  /// Throws chai::Error unless there are >= 2 distinct candidates.
  void validate() const;
};

struct RankingPolicy {
  std::vector<double> theta;
  features::FeatureExtractor feature_config;
  double temperature = 0.6;
  double top_p = 0.9;

  static RankingPolicy zeros(features::FeatureExtractor config);

  /// theta . phi for every candidate.
  std::vector<double> logits(const CandidateSet& set) const;
};

/// The anchor of the KL penalty: uniform, or a frozen policy copy.
class ReferencePolicy {
 public:
  static ReferencePolicy uniform() { return ReferencePolicy(); }
  static ReferencePolicy frozen(RankingPolicy policy) {
    ReferencePolicy r;
    r.frozen_ = std::move(policy);
    return r;
  }

  bool is_uniform() const { return !frozen_.has_value(); }
  const std::optional<RankingPolicy>& frozen_policy() const { return frozen_; }

  std::vector<double> distribution(const CandidateSet& set) const;
  /// Per-candidate log-probabilities up to a shared constant.
  std::vector<double> logits(const CandidateSet& set) const;

 private:
  std::optional<RankingPolicy> frozen_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// Softmax of theta . phi over the candidates.
std::vector<double> policy_distribution(const RankingPolicy& policy, const CandidateSet& set);

/// sum p_i ln(p_i / q_i) with 0 ln 0 = 0. Throws chai::Error on a length
/// mismatch or a zero entry in q.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// r - eta * kl
double total_reward(double r, double kl, double eta);

enum class PpoMode { kSampledPpo, kExactGradient };

struct PPOConfig {
  double eta = 0.04;
  double clip_epsilon = 0.2;
  double lr = 1e-5;
  int epochs = 5;
  std::size_t batch_size = 16;
  std::size_t samples_per_prompt = 4;
  int update_iters = 4;  // surrogate ascent steps per batch (sampled mode)
  std::uint64_t seed = 0;
  PpoMode mode = PpoMode::kSampledPpo;

  void validate() const;
};

json to_json(const PPOConfig& c);
PPOConfig ppo_config_from_json(const json& j);

struct StepDiagnostics {
  double mean_reward = 0.0;  // expected reward under the pre-step policy
  double mean_kl = 0.0;      // KL(pi || ref) under the pre-step policy
  double clip_fraction = 0.0;
};

/// Objective sum_y pi(y|x) r(x,y) - eta KL(pi || ref), averaged over prompts.
double kl_regularized_objective(const RankingPolicy& policy, const ReferencePolicy& ref,
                                const reward::RewardModel& reward,
                                std::span<const CandidateSet> batch, double eta);

/// Exact gradient of kl_regularized_objective with respect to theta.
std::vector<double> kl_regularized_gradient(const RankingPolicy& policy,
                                            const ReferencePolicy& ref,
                                            const reward::RewardModel& reward,
                                            std::span<const CandidateSet> batch, double eta);

/// One update. In sampled mode, actions are drawn from the pre-step policy,
/// advantages are total rewards minus the per-prompt sample mean, and the
/// clipped surrogate plus the exact KL penalty is ascended for
/// config.update_iters steps. In exact mode one ascent step is taken on
/// kl_regularized_objective.
StepDiagnostics ppo_step(RankingPolicy& policy, const ReferencePolicy& ref,
                         const reward::RewardModel& reward, std::span<const CandidateSet> batch,
                         const PPOConfig& config, Rng& rng);

struct PpoHistoryEntry {
  std::size_t step = 0;
  int epoch = 0;
  StepDiagnostics diagnostics;
};

struct PpoResult {
  RankingPolicy policy;
  std::vector<PpoHistoryEntry> history;
  std::vector<double> epoch_expected_reward;  // over all prompts, after each epoch
  std::vector<double> epoch_kl;
};

/// Runs ppo_step over shuffled mini-batches. The policy starts from the
/// frozen reference (or zeros for a uniform reference) and shares the reward
/// model's feature configuration. Throws chai::Error on an empty prompt list
/// and reward::TrainingDiverged on non-finite parameters.
PpoResult train_policy_ppo(const std::vector<CandidateSet>& prompts, const ReferencePolicy& ref,
                           const reward::RewardModel& reward, const PPOConfig& config);

// ---------------------------------------------------------------------------
// DPO

struct DPOConfig {
  double beta = 0.1;
  double lr = 5e-6;
  int epochs = 3;
  std::size_t batch_size = 16;  // 0 = full batch
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::string loss_shape = "sigmoid";

  void validate() const;
};

json to_json(const DPOConfig& c);
DPOConfig dpo_config_from_json(const json& j);

/// beta * [(log pi(c) - log ref(c)) - (log pi(r) - log ref(r))] over the
/// two-candidate set {chosen, rejected}.
double dpo_margin(const RankingPolicy& policy, const ReferencePolicy& ref,
                  const reward::PreferenceRecord& record, double beta);

/// -log sigmoid(dpo_margin).
double dpo_loss(const RankingPolicy& policy, const ReferencePolicy& ref,
                const reward::PreferenceRecord& record, double beta);

/// Gradient of the mean DPO loss over the batch with respect to theta.
std::vector<double> dpo_gradient(const RankingPolicy& policy, const ReferencePolicy& ref,
                                 std::span<const reward::PreferenceRecord> batch, double beta);

struct DpoHistoryEntry {
  std::size_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  double mean_margin = 0.0;
};

struct DpoResult {
  RankingPolicy policy;
  std::vector<DpoHistoryEntry> history;
};

DpoResult train_policy_dpo(const reward::PreferenceDataset& dataset, const ReferencePolicy& ref,
                           const DPOConfig& config, const features::FeatureExtractor& features);

// ---------------------------------------------------------------------------
// Selection

enum class SelectMode { kGreedy, kSample };

struct Selection {
  std::string candidate;
  std::size_t index = 0;
  double probability = 0.0;
};

/// Temperature-scaled, top_p-truncated and renormalized distribution used by
/// sample mode. Candidates outside the nucleus get probability 0.
std::vector<double> sampling_distribution(const RankingPolicy& policy, const CandidateSet& set);

/// Greedy: most probable candidate, ties broken by the lexicographically
/// smallest text. Sample: a draw from sampling_distribution.
Selection select_translation(const RankingPolicy& policy, const CandidateSet& set, SelectMode mode,
                             Rng* rng = nullptr);

json to_json(const RankingPolicy& p);
RankingPolicy policy_from_json(const json& j);
void save_policy(const std::string& path, const RankingPolicy& p);
RankingPolicy load_policy(const std::string& path);

}  // namespace chai::policy

#endif  // CHAI_POLICY_HPP_
