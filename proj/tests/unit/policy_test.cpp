#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "chai/policy.hpp"
#include "test_util.hpp"

namespace chai::policy {
namespace {

features::FeatureExtractor small_features() {
  features::FeatureExtractor f;
  f.hash_dim = 64;
  f.char_ngram_orders = {1, 2};
  return f;
}

RankingPolicy seeded_policy(double scale) {
  auto p = RankingPolicy::zeros(small_features());
  for (std::size_t i = 0; i < p.theta.size(); ++i) p.theta[i] = scale * std::cos(1.7 * double(i));
  return p;
}

std::vector<CandidateSet> prompts() {
  return {{"Good night", {"shubh ratri", "good raat", "good night yaar"}},
          {"I am home", {"main ghar pe hoon", "I am ghar", "main home hoon"}}};
}

reward::RewardModel reward_preferring(const std::string& token) {
  auto m = reward::RewardModel::zeros(small_features());
  const auto phi = m.feature_config.featurize("", token);
  for (const auto& e : phi.entries()) m.weights[e.index] += 1.0;
  return m;
}

TEST(SoftmaxTest, StableAndNormalized) {
  const std::vector<double> big{1000.0, 1000.0, -1000.0};
  const auto p = softmax(big);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[2], 0.0, 1e-15);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-15);
}

TEST(KlTest, HandValuesAndErrors) {
  const std::vector<double> p{0.5, 0.5, 0.0}, q{0.25, 0.25, 0.5};
  EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(kl_divergence(q, q), 0.0);
  EXPECT_THROW(kl_divergence(p, std::vector<double>{0.5, 0.5}), Error);
  EXPECT_THROW(kl_divergence(q, std::vector<double>{0.5, 0.5, 0.0}), Error);
  EXPECT_DOUBLE_EQ(total_reward(1.0, 0.5, 0.04), 0.98);
}

TEST(CandidateSetTest, Validation) {
  EXPECT_THROW((CandidateSet{"s", {"a"}}).validate(), Error);
  EXPECT_THROW((CandidateSet{"s", {"a", "a"}}).validate(), Error);
  EXPECT_NO_THROW((CandidateSet{"s", {"a", "b"}}).validate());
}

TEST(ObjectiveTest, GradientMatchesFiniteDifferences) {
  const auto policy = seeded_policy(0.1);
  const auto ref = ReferencePolicy::frozen(seeded_policy(-0.05));
  const auto rm = reward_preferring("shubh");
  const auto batch = prompts();
  for (double eta : {0.0, 0.3}) {
    const auto g = kl_regularized_gradient(policy, ref, rm, batch, eta);
    const double h = 1e-6;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto plus = policy, minus = policy;
      plus.theta[i] += h;
      minus.theta[i] -= h;
      const double fd = (kl_regularized_objective(plus, ref, rm, batch, eta) -
                         kl_regularized_objective(minus, ref, rm, batch, eta)) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-7) << "eta " << eta << " coordinate " << i;
    }
  }
}

TEST(PpoTest, ExactModeRaisesExpectedReward) {
  PPOConfig c;
  c.mode = PpoMode::kExactGradient;
  c.lr = 0.5;
  c.epochs = 20;
  c.batch_size = 2;
  const auto rm = reward_preferring("shubh ratri");
  const auto r = train_policy_ppo(prompts(), ReferencePolicy::uniform(), rm, c);
  ASSERT_EQ(r.epoch_expected_reward.size(), 20u);
  EXPECT_GT(r.epoch_expected_reward.back(), r.epoch_expected_reward.front());
  EXPECT_FALSE(r.history.empty());
}

TEST(PpoTest, SampledModeIsDeterministicForSeed) {
  PPOConfig c;
  c.lr = 0.1;
  c.epochs = 3;
  c.batch_size = 1;
  c.seed = 11;
  const auto rm = reward_preferring("main ghar");
  const auto a = train_policy_ppo(prompts(), ReferencePolicy::uniform(), rm, c);
  const auto b = train_policy_ppo(prompts(), ReferencePolicy::uniform(), rm, c);
  EXPECT_EQ(a.policy.theta, b.policy.theta);
  EXPECT_THROW(train_policy_ppo({}, ReferencePolicy::uniform(), rm, c), Error);
}

TEST(PpoTest, ConfigValidation) {
  PPOConfig c;
  c.eta = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.clip_epsilon = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mode = PpoMode::kExactGradient;
  c.eta = 0.5;
  const auto back = ppo_config_from_json(to_json(c));
  EXPECT_EQ(back.mode, PpoMode::kExactGradient);
  EXPECT_DOUBLE_EQ(back.eta, 0.5);
}

TEST(DpoTest, MarginIsZeroAtTheReference) {
  const auto p = seeded_policy(0.2);
  const auto ref = ReferencePolicy::frozen(p);
  const reward::PreferenceRecord rec{"s", "shubh ratri", "good raat"};
  EXPECT_NEAR(dpo_margin(p, ref, rec, 0.1), 0.0, 1e-15);
  EXPECT_NEAR(dpo_loss(p, ref, rec, 0.1), std::log(2.0), 1e-15);
}

TEST(DpoTest, GradientMatchesFiniteDifferences) {
  const auto p = seeded_policy(0.1);
  const auto ref = ReferencePolicy::uniform();
  const std::vector<reward::PreferenceRecord> batch{{"s", "shubh ratri", "good raat"},
                                                    {"t", "main ghar", "I am ghar"}};
  const double beta = 0.7;
  const auto g = dpo_gradient(p, ref, batch, beta);
  const double h = 1e-6;
  auto mean_loss = [&](const RankingPolicy& q) {
    return (dpo_loss(q, ref, batch[0], beta) + dpo_loss(q, ref, batch[1], beta)) / 2.0;
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto plus = p, minus = p;
    plus.theta[i] += h;
    minus.theta[i] -= h;
    EXPECT_NEAR(g[i], (mean_loss(plus) - mean_loss(minus)) / (2 * h), 1e-7) << i;
  }
}

TEST(DpoTest, TrainingPrefersChosenAndRejectsZeroBeta) {
  reward::PreferenceDataset d;
  d.records = {{"s", "shubh ratri", "good raat"}, {"t", "main ghar pe", "I am ghar"}};
  DPOConfig c;
  c.lr = 1.0;
  c.epochs = 30;
  c.batch_size = 0;
  const auto r = train_policy_dpo(d, ReferencePolicy::uniform(), c, small_features());
  for (const auto& rec : d.records) {
    EXPECT_GT(dpo_margin(r.policy, ReferencePolicy::uniform(), rec, c.beta), 0.0);
  }
  c.beta = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(SelectionTest, GreedyTieBreaksLexicographically) {
  const auto p = RankingPolicy::zeros(small_features());
  const CandidateSet set{"s", {"zeta", "alpha", "mid"}};
  const auto s = select_translation(p, set, SelectMode::kGreedy);
  EXPECT_EQ(s.candidate, "alpha");
  EXPECT_EQ(s.index, 1u);
  EXPECT_NEAR(s.probability, 1.0 / 3.0, 1e-15);
}

TEST(SelectionTest, TopPTruncatesTheTail) {
  auto p = RankingPolicy::zeros(small_features());
  const CandidateSet set{"s", {"shubh ratri", "good raat", "xq"}};
  const auto rm = reward_preferring("shubh ratri");
  p.theta = rm.weights;
  for (auto& w : p.theta) w *= 3.0;
  p.temperature = 1.0;
  p.top_p = 0.5;
  const auto dist = sampling_distribution(p, set);
  EXPECT_DOUBLE_EQ(dist[0], 1.0);
  EXPECT_DOUBLE_EQ(dist[1] + dist[2], 0.0);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(select_translation(p, set, SelectMode::kSample, &rng).index, 0u);
  EXPECT_THROW(select_translation(p, set, SelectMode::kSample), Error);
  p.top_p = 1.0;
  for (auto& w : p.theta) w /= 30.0;
  const auto full = sampling_distribution(p, set);
  EXPECT_GT(full[1], 0.0);
  EXPECT_NEAR(full[0] + full[1] + full[2], 1.0, 1e-12);
  p.temperature = 0.0;
  EXPECT_THROW(sampling_distribution(p, set), ConfigError);
}

TEST(PolicyTest, SaveLoadRoundTrip) {
  chai::testing::TempDir dir;
  auto p = seeded_policy(0.3);
  p.temperature = 0.2;
  save_policy(dir.file("p.json"), p);
  const auto back = load_policy(dir.file("p.json"));
  EXPECT_EQ(back.theta, p.theta);
  EXPECT_EQ(back.feature_config, p.feature_config);
  EXPECT_DOUBLE_EQ(back.temperature, 0.2);
  EXPECT_THROW(load_policy(dir.write("bad.json", R"({"format":"other"})")), Error);
}

}  // namespace
}  // namespace chai::policy
