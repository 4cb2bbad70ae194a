#include "chai/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "chai/oracle.hpp"

namespace chai::policy {
namespace {

// Featurized prompt with rewards and reference log-probabilities cached.
struct Prepared {
  std::vector<features::SparseVector> phi;
  std::vector<double> reward;
  std::vector<double> ref_logp;
};

Prepared prepare(const CandidateSet& set, const features::FeatureExtractor& fx,
                 const ReferencePolicy& ref, const reward::RewardModel* rm) {
  set.validate();
  Prepared p;
  p.phi.reserve(set.candidates.size());
  for (const auto& c : set.candidates) p.phi.push_back(fx.featurize(set.source, c));
  if (rm != nullptr) {
    for (const auto& c : set.candidates) p.reward.push_back(rm->score(set.source, c));
  }
  for (double q : ref.distribution(set)) p.ref_logp.push_back(std::log(q));
  return p;
}

std::vector<double> logits_of(const Prepared& p, std::span<const double> theta) {
  std::vector<double> out;
  out.reserve(p.phi.size());
  for (const auto& f : p.phi) out.push_back(f.dot(theta));
  return out;
}

double kl_from_logp(std::span<const double> pi, std::span<const double> ref_logp) {
  double kl = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] > 0) kl += pi[i] * (std::log(pi[i]) - ref_logp[i]);
  }
  return std::max(kl, 0.0);
}

double expected(std::span<const double> pi, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * v[i];
  return s;
}

// grad += scale * d/dtheta [ sum_y pi_y r_y - eta KL(pi || ref) ]
//       = scale * sum_y pi_y (g_y - E_pi g) phi_y,  g_y = r_y - eta log(pi_y / ref_y)
void add_exact_gradient(const Prepared& p, std::span<const double> pi, double eta, double scale,
                        std::span<double> grad) {
  std::vector<double> g(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) g[i] = p.reward[i] - eta * (std::log(pi[i]) - p.ref_logp[i]);
  const double g_bar = expected(pi, g);
  for (std::size_t i = 0; i < pi.size(); ++i) p.phi[i].axpy(scale * pi[i] * (g[i] - g_bar), grad);
}

// grad += scale * d/dtheta [ -eta KL(pi || ref) ] = -scale * eta * sum_y pi_y (lr_y - KL) phi_y
void add_kl_gradient(const Prepared& p, std::span<const double> pi, double eta, double scale,
                     std::span<double> grad) {
  if (eta == 0.0) return;
  std::vector<double> lr(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) lr[i] = std::log(pi[i]) - p.ref_logp[i];
  const double kl = expected(pi, lr);
  for (std::size_t i = 0; i < pi.size(); ++i) p.phi[i].axpy(-scale * eta * pi[i] * (lr[i] - kl), grad);
}

void check_finite(std::span<const double> theta, const char* what) {
  for (double x : theta) {
    if (!std::isfinite(x)) throw reward::TrainingDiverged(std::string(what) + ": non-finite parameters");
  }
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  return last_positive;
}

const features::FeatureExtractor& policy_features(const ReferencePolicy& ref,
                                                  const features::FeatureExtractor& fallback) {
  return ref.is_uniform() ? fallback : ref.frozen_policy()->feature_config;
}

RankingPolicy initial_policy(const ReferencePolicy& ref, const features::FeatureExtractor& fx) {
  if (!ref.is_uniform()) {
    if (!(ref.frozen_policy()->feature_config == fx)) {
      throw ConfigError("reference policy features differ from the reward model's");
    }
    return *ref.frozen_policy();
  }
  return RankingPolicy::zeros(fx);
}

}  // namespace

void CandidateSet::validate() const {
  if (candidates.size() < 2) throw Error("candidate set needs at least two candidates");
  std::set<std::string> seen(candidates.begin(), candidates.end());
  if (seen.size() != candidates.size()) throw Error("candidate set contains duplicates");
}

RankingPolicy RankingPolicy::zeros(features::FeatureExtractor config) {
  config.validate();
  RankingPolicy p;
  p.theta.assign(config.hash_dim, 0.0);
  p.feature_config = std::move(config);
  return p;
}

std::vector<double> RankingPolicy::logits(const CandidateSet& set) const {
  std::vector<double> out;
  out.reserve(set.candidates.size());
  for (const auto& c : set.candidates) out.push_back(feature_config.featurize(set.source, c).dot(theta));
  return out;
}

std::vector<double> ReferencePolicy::logits(const CandidateSet& set) const {
  if (is_uniform()) return std::vector<double>(set.candidates.size(), 0.0);
  return frozen_->logits(set);
}

std::vector<double> ReferencePolicy::distribution(const CandidateSet& set) const {
  return softmax(logits(set));
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (auto& x : out) x /= z;
  return out;
}

std::vector<double> policy_distribution(const RankingPolicy& policy, const CandidateSet& set) {
  set.validate();
  return softmax(policy.logits(set));
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0)) throw Error("kl_divergence: q has a zero entry");
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(kl, 0.0);
}

double total_reward(double r, double kl, double eta) { return r - eta * kl; }

void PPOConfig::validate() const {
  if (eta < 0.0) throw ConfigError("eta must be >= 0");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) throw ConfigError("clip_epsilon must be in (0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (mode == PpoMode::kSampledPpo && samples_per_prompt < 1) {
    throw ConfigError("samples_per_prompt must be >= 1");
  }
  if (update_iters < 1) throw ConfigError("update_iters must be >= 1");
}

json to_json(const PPOConfig& c) {
  return json{{"eta", c.eta},
              {"clip_epsilon", c.clip_epsilon},
              {"lr", c.lr},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"samples_per_prompt", c.samples_per_prompt},
              {"update_iters", c.update_iters},
              {"seed", c.seed},
              {"mode", c.mode == PpoMode::kSampledPpo ? "sampled_ppo" : "exact_gradient"}};
}

PPOConfig ppo_config_from_json(const json& j) {
  PPOConfig c;
  c.eta = j.value("eta", c.eta);
  c.clip_epsilon = j.value("clip_epsilon", c.clip_epsilon);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.samples_per_prompt = j.value("samples_per_prompt", c.samples_per_prompt);
  c.update_iters = j.value("update_iters", c.update_iters);
  c.seed = j.value("seed", c.seed);
  const std::string mode = j.value("mode", "sampled_ppo");
  if (mode == "sampled_ppo") c.mode = PpoMode::kSampledPpo;
  else if (mode == "exact_gradient") c.mode = PpoMode::kExactGradient;
  else throw ConfigError("unknown ppo mode '" + mode + "'");
  c.validate();
  return c;
}

double kl_regularized_objective(const RankingPolicy& policy, const ReferencePolicy& ref,
                                const reward::RewardModel& reward,
                                std::span<const CandidateSet> batch, double eta) {
  if (batch.empty()) throw Error("empty batch");
  double total = 0.0;
  for (const auto& set : batch) {
    const Prepared p = prepare(set, policy.feature_config, ref, &reward);
    const auto pi = softmax(logits_of(p, policy.theta));
    total += expected(pi, p.reward) - eta * kl_from_logp(pi, p.ref_logp);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> kl_regularized_gradient(const RankingPolicy& policy,
                                            const ReferencePolicy& ref,
                                            const reward::RewardModel& reward,
                                            std::span<const CandidateSet> batch, double eta) {
  if (batch.empty()) throw Error("empty batch");
  std::vector<double> grad(policy.theta.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& set : batch) {
    const Prepared p = prepare(set, policy.feature_config, ref, &reward);
    const auto pi = softmax(logits_of(p, policy.theta));
    add_exact_gradient(p, pi, eta, scale, grad);
  }
  return grad;
}

namespace {

StepDiagnostics step_prepared(RankingPolicy& policy, std::span<const Prepared* const> batch,
                              const PPOConfig& config, Rng& rng) {
  StepDiagnostics diag;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<std::vector<double>> old_pi;
  old_pi.reserve(batch.size());
  for (const auto* p : batch) {
    old_pi.push_back(softmax(logits_of(*p, policy.theta)));
    diag.mean_reward += scale * expected(old_pi.back(), p->reward);
    diag.mean_kl += scale * kl_from_logp(old_pi.back(), p->ref_logp);
  }
  std::vector<double> grad(policy.theta.size());

  if (config.mode == PpoMode::kExactGradient) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t b = 0; b < batch.size(); ++b) add_exact_gradient(*batch[b], old_pi[b], config.eta, scale, grad);
    for (std::size_t i = 0; i < grad.size(); ++i) policy.theta[i] += config.lr * grad[i];
    check_finite(policy.theta, "ppo_step");
    return diag;
  }

  // Rollouts from the pre-step policy.
  const std::size_t k = config.samples_per_prompt;
  std::vector<std::vector<std::size_t>> actions(batch.size());
  std::vector<std::vector<double>> advantages(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double kl_old = kl_from_logp(old_pi[b], batch[b]->ref_logp);
    std::vector<double> totals;
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t a = sample_index(old_pi[b], rng);
      actions[b].push_back(a);
      totals.push_back(total_reward(batch[b]->reward[a], kl_old, config.eta));
    }
    const double baseline = std::accumulate(totals.begin(), totals.end(), 0.0) / static_cast<double>(k);
    for (double t : totals) advantages[b].push_back(t - baseline);
  }

  const double lo = 1.0 - config.clip_epsilon;
  const double hi = 1.0 + config.clip_epsilon;
  for (int iter = 0; iter < config.update_iters; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::size_t clipped = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Prepared& p = *batch[b];
      const auto pi = softmax(logits_of(p, policy.theta));
      // phi_bar = E_pi phi, applied through the identity
      // grad log pi(a) = phi_a - sum_y pi_y phi_y.
      std::vector<double> coeff(pi.size(), 0.0);
      for (std::size_t s = 0; s < k; ++s) {
        const std::size_t a = actions[b][s];
        const double adv = advantages[b][s];
        const double ratio = pi[a] / old_pi[b][a];
        const bool outside = ratio < lo || ratio > hi;
        if (outside) ++clipped;
        // min(ratio*A, clip(ratio)*A) takes the clipped branch (zero
        // gradient) when the ratio has moved past the bound in A's direction.
        if ((adv > 0 && ratio > hi) || (adv < 0 && ratio < lo)) continue;
        const double w = adv * ratio / static_cast<double>(k);
        coeff[a] += w;
        for (std::size_t y = 0; y < pi.size(); ++y) coeff[y] -= w * pi[y];
      }
      for (std::size_t y = 0; y < pi.size(); ++y) {
        if (coeff[y] != 0.0) p.phi[y].axpy(scale * coeff[y], grad);
      }
      add_kl_gradient(p, pi, config.eta, scale, grad);
    }
    diag.clip_fraction = static_cast<double>(clipped) / static_cast<double>(batch.size() * k);
    for (std::size_t i = 0; i < grad.size(); ++i) policy.theta[i] += config.lr * grad[i];
    check_finite(policy.theta, "ppo_step");
  }
  return diag;
}

}  // namespace

StepDiagnostics ppo_step(RankingPolicy& policy, const ReferencePolicy& ref,
                         const reward::RewardModel& reward, std::span<const CandidateSet> batch,
                         const PPOConfig& config, Rng& rng) {
  config.validate();
  if (batch.empty()) throw Error("ppo_step: empty batch");
  std::vector<Prepared> prepared;
  prepared.reserve(batch.size());
  for (const auto& set : batch) prepared.push_back(prepare(set, policy.feature_config, ref, &reward));
  std::vector<const Prepared*> ptrs;
  for (const auto& p : prepared) ptrs.push_back(&p);
  return step_prepared(policy, ptrs, config, rng);
}

PpoResult train_policy_ppo(const std::vector<CandidateSet>& prompts, const ReferencePolicy& ref,
                           const reward::RewardModel& reward, const PPOConfig& config) {
  config.validate();
  if (prompts.empty()) throw Error("train_policy_ppo: empty prompt list");
  PpoResult result{initial_policy(ref, reward.feature_config), {}, {}, {}};
  const auto& fx = policy_features(ref, reward.feature_config);

  std::vector<Prepared> prepared;
  prepared.reserve(prompts.size());
  for (const auto& set : prompts) prepared.push_back(prepare(set, fx, ref, &reward));

  Rng rng(derive_seed(config.seed, "train_policy_ppo"));
  std::vector<std::size_t> order(prompts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;
  std::vector<const Prepared*> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(start + config.batch_size, order.size()); ++i) {
        batch.push_back(&prepared[order[i]]);
      }
      const auto diag = step_prepared(result.policy, batch, config, rng);
      result.history.push_back({step++, epoch, diag});
    }
    double reward_sum = 0.0;
    double kl_sum = 0.0;
    for (const auto& p : prepared) {
      const auto pi = softmax(logits_of(p, result.policy.theta));
      reward_sum += expected(pi, p.reward);
      kl_sum += kl_from_logp(pi, p.ref_logp);
    }
    const double n = static_cast<double>(prepared.size());
    result.epoch_expected_reward.push_back(reward_sum / n);
    result.epoch_kl.push_back(kl_sum / n);
    if (!std::isfinite(reward_sum) || !std::isfinite(kl_sum)) {
      throw reward::TrainingDiverged("policy training produced non-finite objective");
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// DPO

void DPOConfig::validate() const {
  if (!(beta > 0.0)) throw ConfigError("DPO beta must be > 0");
  if (!(lr > 0.0)) throw ConfigError("DPO lr must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (loss_shape != "sigmoid") throw ConfigError("unsupported DPO loss shape '" + loss_shape + "'");
}

json to_json(const DPOConfig& c) {
  return json{{"beta", c.beta},   {"lr", c.lr},           {"epochs", c.epochs},
              {"batch_size", c.batch_size}, {"seed", c.seed}, {"shuffle", c.shuffle},
              {"loss_shape", c.loss_shape}};
}

DPOConfig dpo_config_from_json(const json& j) {
  DPOConfig c;
  c.beta = j.value("beta", c.beta);
  c.lr = j.value("lr", c.lr);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.shuffle = j.value("shuffle", c.shuffle);
  c.loss_shape = j.value("loss_shape", c.loss_shape);
  c.validate();
  return c;
}

namespace {

struct DpoPrepared {
  features::SparseVector diff;  // phi(chosen) - phi(rejected)
  double ref_margin = 0.0;      // ref log-ratio chosen vs rejected
};

DpoPrepared prepare_dpo(const reward::PreferenceRecord& r, const features::FeatureExtractor& fx,
                        const ReferencePolicy& ref) {
  DpoPrepared p;
  p.diff = fx.featurize(r.source, r.chosen).minus(fx.featurize(r.source, r.rejected));
  if (!ref.is_uniform()) {
    const auto& f = *ref.frozen_policy();
    p.ref_margin = f.feature_config.featurize(r.source, r.chosen).dot(f.theta) -
                   f.feature_config.featurize(r.source, r.rejected).dot(f.theta);
  }
  return p;
}

}  // namespace

double dpo_margin(const RankingPolicy& policy, const ReferencePolicy& ref,
                  const reward::PreferenceRecord& record, double beta) {
  // Over the set {chosen, rejected}: log pi(c) - log pi(r) = logit_c - logit_r.
  const auto p = prepare_dpo(record, policy.feature_config, ref);
  return beta * (p.diff.dot(policy.theta) - p.ref_margin);
}

double dpo_loss(const RankingPolicy& policy, const ReferencePolicy& ref,
                const reward::PreferenceRecord& record, double beta) {
  return reward::neg_log_sigmoid(dpo_margin(policy, ref, record, beta));
}

std::vector<double> dpo_gradient(const RankingPolicy& policy, const ReferencePolicy& ref,
                                 std::span<const reward::PreferenceRecord> batch, double beta) {
  if (batch.empty()) throw Error("dpo_gradient: empty batch");
  std::vector<double> grad(policy.theta.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& r : batch) {
    const auto p = prepare_dpo(r, policy.feature_config, ref);
    const double m = beta * (p.diff.dot(policy.theta) - p.ref_margin);
    p.diff.axpy(-annotator::sigmoid(-m) * beta * inv, grad);
  }
  return grad;
}

DpoResult train_policy_dpo(const reward::PreferenceDataset& dataset, const ReferencePolicy& ref,
                           const DPOConfig& config, const features::FeatureExtractor& features) {
  config.validate();
  if (dataset.empty()) throw Error("train_policy_dpo: empty dataset");
  DpoResult result{initial_policy(ref, features), {}};
  const auto& fx = result.policy.feature_config;

  std::vector<DpoPrepared> prepared;
  prepared.reserve(dataset.size());
  for (const auto& r : dataset.records) prepared.push_back(prepare_dpo(r, fx, ref));
  const std::size_t n = prepared.size();
  const std::size_t batch = config.batch_size == 0 ? n : std::min(config.batch_size, n);

  auto margin = [&](const DpoPrepared& p) { return config.beta * (p.diff.dot(result.policy.theta) - p.ref_margin); };
  auto full_loss = [&] {
    double s = 0.0;
    for (const auto& p : prepared) s += reward::neg_log_sigmoid(margin(p));
    return s / static_cast<double>(n);
  };
  const double initial = full_loss();

  Rng rng(derive_seed(config.seed, "train_policy_dpo"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(result.policy.theta.size());
  std::size_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(start + batch, n);
      const double inv = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      double margin_sum = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& p = prepared[order[i]];
        const double m = margin(p);
        loss += reward::neg_log_sigmoid(m) * inv;
        margin_sum += m * inv;
        p.diff.axpy(-annotator::sigmoid(-m) * config.beta * inv, grad);
      }
      for (std::size_t i = 0; i < grad.size(); ++i) result.policy.theta[i] -= config.lr * grad[i];
      result.history.push_back({step++, epoch, loss, margin_sum});
      check_finite(result.policy.theta, "train_policy_dpo");
    }
    const double l = full_loss();
    if (!std::isfinite(l) || l > 10.0 * initial) {
      throw reward::TrainingDiverged("DPO training diverged at epoch " + std::to_string(epoch + 1));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Selection

namespace {

// Candidate indices by descending probability, ties by candidate text.
std::vector<std::size_t> rank_order(const std::vector<double>& probs, const CandidateSet& set) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return set.candidates[a] < set.candidates[b];
  });
  return idx;
}

}  // namespace

std::vector<double> sampling_distribution(const RankingPolicy& policy, const CandidateSet& set) {
  set.validate();
  if (!(policy.temperature > 0.0)) throw ConfigError("sampling temperature must be > 0");
  if (!(policy.top_p > 0.0 && policy.top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  auto logits = policy.logits(set);
  for (auto& l : logits) l /= policy.temperature;
  const auto probs = softmax(logits);
  const auto order = rank_order(probs, set);
  std::vector<double> out(probs.size(), 0.0);
  double cum = 0.0;
  for (std::size_t i : order) {
    out[i] = probs[i];
    cum += probs[i];
    if (cum >= policy.top_p) break;
  }
  for (auto& x : out) x /= cum;
  return out;
}

Selection select_translation(const RankingPolicy& policy, const CandidateSet& set, SelectMode mode,
                             Rng* rng) {
  if (mode == SelectMode::kGreedy) {
    const auto probs = policy_distribution(policy, set);
    const std::size_t best = rank_order(probs, set).front();
    return {set.candidates[best], best, probs[best]};
  }
  if (rng == nullptr) throw Error("sample mode requires a random source");
  const auto probs = sampling_distribution(policy, set);
  const std::size_t i = sample_index(probs, *rng);
  return {set.candidates[i], i, probs[i]};
}

json to_json(const RankingPolicy& p) {
  return json{{"format", "chai-policy"},
              {"version", 1},
              {"feature_config", features::to_json(p.feature_config)},
              {"theta", p.theta},
              {"temperature", p.temperature},
              {"top_p", p.top_p}};
}

RankingPolicy policy_from_json(const json& j) {
  if (j.value("format", "") != "chai-policy") throw Error("not a policy file");
  if (j.value("version", 0) != 1) throw Error("unsupported policy version");
  RankingPolicy p;
  p.feature_config = features::feature_extractor_from_json(j.at("feature_config"));
  p.theta = j.at("theta").get<std::vector<double>>();
  if (p.theta.size() != p.feature_config.hash_dim) throw Error("theta length does not match hash_dim");
  p.temperature = j.value("temperature", p.temperature);
  p.top_p = j.value("top_p", p.top_p);
  return p;
}

void save_policy(const std::string& path, const RankingPolicy& p) { text::write_file(path, to_json(p).dump() + "\n"); }

RankingPolicy load_policy(const std::string& path) {
  try {
    return policy_from_json(json::parse(text::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": malformed policy: " + e.what());
  }
}

}  // namespace chai::policy
