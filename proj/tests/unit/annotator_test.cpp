#include <gtest/gtest.h>

#include <atomic>
#include <mutex>

#include "chai/annotator.hpp"
#include "test_util.hpp"

namespace chai::annotator {
namespace {

using chai::testing::TempDir;

// Answers by looking the prompt up in a fixed rule; records every call.
class FakeBackend : public ChatBackend {
 public:
  explicit FakeBackend(std::function<std::string(const std::string&, double)> reply)
      : reply_(std::move(reply)) {}
  std::string complete(const std::vector<ChatMessage>& messages, double temperature) override {
    std::lock_guard lock(mu_);
    prompts_.push_back(messages.back().content);
    return reply_(messages.back().content, temperature);
  }
  std::string model_name() const override { return "fake-model"; }
  std::vector<std::string> prompts() {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  std::function<std::string(const std::string&, double)> reply_;
  std::mutex mu_;
  std::vector<std::string> prompts_;
};

corpus::PreferencePair make_pair(std::string id, std::string a, std::string b, bool swap) {
  corpus::PreferencePair p;
  p.pair_id = std::move(id);
  p.row_id = "r";
  p.source_text = "Good night";
  p.candidate_a = std::move(a);
  p.candidate_b = std::move(b);
  p.swap_applied = swap;
  return p;
}

TEST(ParsePreferenceTest, TruthTable) {
  EXPECT_EQ(parse_preference("My preference is: 0"), Choice::kFirst);
  EXPECT_EQ(parse_preference("my PREFERENCE is :1"), Choice::kSecond);
  EXPECT_EQ(parse_preference("Reasoning...\nMy preference is: **1**"), Choice::kSecond);
  EXPECT_EQ(parse_preference("My preference is: \"0\"."), Choice::kFirst);
  EXPECT_EQ(parse_preference("My preference is: 0. Later: My preference is: 1"), Choice::kFirst);
  EXPECT_EQ(parse_preference("1"), Choice::kSecond);
  EXPECT_EQ(parse_preference("  0.\n"), Choice::kFirst);
  EXPECT_EQ(parse_preference("My preference is: 10"), Choice::kUnparseable);
  EXPECT_EQ(parse_preference("My preference is: 2"), Choice::kUnparseable);
  EXPECT_EQ(parse_preference("I prefer the first one"), Choice::kUnparseable);
  EXPECT_EQ(parse_preference("1 because it is natural"), Choice::kUnparseable);
  EXPECT_EQ(parse_preference(""), Choice::kUnparseable);
}

TEST(MajorityVoteTest, StrictMajorityOverParseableChoices) {
  using C = Choice;
  auto vote = [](std::vector<Choice> c) { return majority_vote(c); };
  EXPECT_EQ(vote({C::kFirst, C::kFirst, C::kSecond}), 0);
  EXPECT_EQ(vote({C::kSecond, C::kFirst, C::kSecond}), 1);
  EXPECT_EQ(vote({C::kFirst, C::kSecond, C::kUnparseable}), std::nullopt);
  EXPECT_EQ(vote({C::kSecond, C::kUnparseable, C::kUnparseable}), 1);
  EXPECT_EQ(vote({C::kUnparseable, C::kUnparseable, C::kUnparseable}), std::nullopt);
  EXPECT_EQ(vote({}), std::nullopt);
}

TEST(ResolveTest, CanonicalLabelUndoesTheSwap) {
  Verdict v;
  v.choices = {Choice::kFirst, Choice::kFirst, Choice::kSecond};
  resolve(v, false);
  EXPECT_EQ(v.majority_label, 0);
  EXPECT_EQ(v.canonical_label, 0);
  resolve(v, true);
  EXPECT_EQ(v.majority_label, 0);
  EXPECT_EQ(v.canonical_label, 1);
  v.choices = {Choice::kFirst, Choice::kSecond, Choice::kUnparseable};
  resolve(v, true);
  EXPECT_FALSE(v.majority_label);
  EXPECT_FALSE(v.canonical_label);
}

TEST(AnnotatorConfigTest, Validate) {
  AnnotatorConfig c;
  EXPECT_NO_THROW(c.validate());
  c.temperatures = {0.1, 0.3};
  EXPECT_THROW(c.validate(), ConfigError);
  c.temperatures = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c.temperatures = {0.0};
  EXPECT_THROW(c.validate(), ConfigError);
  c.temperatures = {2.5};
  EXPECT_THROW(c.validate(), ConfigError);
  c.temperatures = {2.0};
  EXPECT_NO_THROW(c.validate());
  c.parallelism = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(AnnotatorConfigTest, JsonRoundTrip) {
  AnnotatorConfig c;
  c.temperatures = {0.2};
  c.model_name = "m";
  const auto back = annotator_config_from_json(to_json(c));
  EXPECT_EQ(back.temperatures, c.temperatures);
  EXPECT_EQ(back.model_name, "m");
}

TEST(AnnotatePairsTest, OneRequestPerTemperatureAndCanonicalLabels) {
  // The backend always prefers whichever displayed sentence contains "shubh".
  FakeBackend backend([](const std::string& prompt, double) {
    const auto first = prompt.find("Translated-sentence-0 is: shubh");
    return std::string("My preference is: ") + (first != std::string::npos ? "0" : "1");
  });
  std::vector<corpus::PreferencePair> pairs;
  for (int i = 0; i < 20; ++i) {
    pairs.push_back(make_pair("p" + std::to_string(i), "shubh ratri", "good raat", i % 2 == 1));
    if (i % 2 == 1) std::swap(pairs.back().candidate_a, pairs.back().candidate_b);
  }
  AnnotatorConfig config;
  config.parallelism = 4;
  const auto verdicts = annotate_pairs(pairs, config, prompts::basic_preference_template(), backend);
  ASSERT_EQ(verdicts.size(), pairs.size());
  EXPECT_EQ(backend.prompts().size(), pairs.size() * 3);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_EQ(verdicts[i].pair_id, pairs[i].pair_id);
    EXPECT_EQ(verdicts[i].choices.size(), 3u);
    EXPECT_EQ(verdicts[i].majority_label, pairs[i].swap_applied ? 1 : 0);
    EXPECT_EQ(verdicts[i].canonical_label, 0);
    EXPECT_EQ(verdicts[i].model_name, "fake-model");
    EXPECT_EQ(verdicts[i].template_name, "basic");
  }
}

TEST(AnnotatePairsTest, CotIssuesRationaleFirst) {
  FakeBackend backend([](const std::string& prompt, double) -> std::string {
    if (prompt.find("My preference is") == std::string::npos) return "Rationale: the first reads naturally";
    return "My preference is: 0";
  });
  const auto v = annotate_pair(make_pair("p", "a", "b", false), AnnotatorConfig{},
                               prompts::cot_preference_template(), backend);
  const auto sent = backend.prompts();
  ASSERT_EQ(sent.size(), 6u);
  EXPECT_EQ(v.canonical_label, 0);
  EXPECT_EQ(v.raw_responses[0], "Rationale: the first reads naturally\nMy preference is: 0");
  std::size_t with_rationale = 0;
  for (const auto& s : sent) with_rationale += s.find("Rationale: the first reads naturally") != std::string::npos;
  EXPECT_EQ(with_rationale, 3u);
}

TEST(AnnotatePairsTest, BackendErrorsPropagate) {
  FakeBackend backend([](const std::string&, double) -> std::string { throw TransportError("down"); });
  EXPECT_THROW(annotate_pair(make_pair("p", "a", "b", false), AnnotatorConfig{},
                             prompts::basic_preference_template(), backend),
               TransportError);
}

TEST(VerdictTest, SaveLoadRoundTrip) {
  TempDir dir;
  Verdict v;
  v.pair_id = "r:0-1";
  v.choices = {Choice::kFirst, Choice::kUnparseable, Choice::kFirst};
  resolve(v, true);
  v.raw_responses = {"My preference is: 0", "?", "0"};
  v.model_name = "m";
  save_verdicts(dir.file("v.jsonl"), {v});
  const auto back = load_verdicts(dir.file("v.jsonl"));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].choices, v.choices);
  EXPECT_EQ(back[0].canonical_label, 1);
  EXPECT_EQ(back[0].raw_responses, v.raw_responses);
}

Verdict fixed(const corpus::PreferencePair& p, Label majority) {
  Verdict v;
  v.pair_id = p.pair_id;
  v.majority_label = majority;
  return v;
}

TEST(BiasAuditTest, AlwaysFirstIsFullyBiased) {
  std::vector<corpus::PreferencePair> pairs{make_pair("a", "x", "y", false), make_pair("b", "u", "v", true)};
  const auto r = audit_positional_bias(pairs, [](const corpus::PreferencePair& p) { return fixed(p, 0); });
  EXPECT_EQ(r.total, 2u);
  EXPECT_EQ(r.biased_count, 2u);
  EXPECT_DOUBLE_EQ(r.bias_rate, 1.0);
}

TEST(BiasAuditTest, ContentFollowingAnnotatorIsUnbiased) {
  std::vector<corpus::PreferencePair> pairs{make_pair("a", "good", "bad", false)};
  const auto r = audit_positional_bias(
      pairs, [](const corpus::PreferencePair& p) { return fixed(p, p.candidate_a == "good" ? 0 : 1); });
  EXPECT_EQ(r.biased_count, 0u);
  EXPECT_DOUBLE_EQ(r.bias_rate, 0.0);
  EXPECT_EQ(to_json(r, true)["details"].size(), 1u);
}

TEST(BiasAuditTest, UnresolvedRunsAreExcluded) {
  std::vector<corpus::PreferencePair> pairs{make_pair("a", "x", "y", false), make_pair("b", "u", "v", false)};
  const auto r = audit_positional_bias(pairs, [](const corpus::PreferencePair& p) {
    return fixed(p, p.pair_id == "a" ? Label{} : Label{1});
  });
  EXPECT_EQ(r.unresolved, 1u);
  EXPECT_EQ(r.total, 1u);
  EXPECT_DOUBLE_EQ(r.bias_rate, 1.0);
}

TEST(AlignmentTest, ScoresResolvedVerdictsOnly) {
  std::vector<Verdict> v(3);
  v[0].pair_id = "a";
  v[0].canonical_label = 0;
  v[1].pair_id = "b";
  v[1].canonical_label = 0;
  v[2].pair_id = "c";
  const auto r = alignment_score(v, {{"a", 0}, {"b", 1}, {"c", 1}});
  EXPECT_EQ(r.resolved, 2u);
  EXPECT_EQ(r.unresolved, 1u);
  EXPECT_EQ(r.matched, 1u);
  ASSERT_TRUE(r.score);
  EXPECT_DOUBLE_EQ(*r.score, 0.5);
  EXPECT_THROW(alignment_score(v, {{"a", 0}}), Error);
  EXPECT_FALSE(alignment_score({v[2]}, {{"c", 0}}).score);
}

TEST(AlignmentTest, LoadsHumanLabelsFromExports) {
  TempDir dir;
  const auto path = dir.write("h.jsonl",
                              "{\"export\":\"human\"}\n"
                              "{\"pair_id\":\"a\",\"majority\":1}\n"
                              "{\"pair_id\":\"b\",\"majority\":null}\n"
                              "{\"pair_id\":\"c\",\"label\":0}\n");
  const auto labels = load_human_labels(path);
  EXPECT_EQ(labels, (std::map<std::string, int>{{"a", 1}, {"c", 0}}));
  EXPECT_THROW(load_human_labels(dir.write("bad.jsonl", "{\"pair_id\":\"a\",\"label\":3}\n")), Error);
}

}  // namespace
}  // namespace chai::annotator
