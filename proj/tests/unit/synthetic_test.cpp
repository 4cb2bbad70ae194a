#include <gtest/gtest.h>

#include <set>

#include "chai/synthetic.hpp"

namespace chai::synthetic {
namespace {

TEST(SyntheticTest, WorldIsDeterministicAndScoresAdditively) {
  const auto w = make_world(3);
  EXPECT_EQ(w.weights, make_world(3).weights);
  EXPECT_NE(w.weights, make_world(4).weights);
  const auto& c = w.concepts[0];
  const auto& d = w.concepts[1];
  EXPECT_NEAR(w.score(c.hindi + " " + d.english), w.weights.at(c.hindi) + w.weights.at(d.english), 1e-12);
  EXPECT_THROW(make_world(1, 1.0, {}), ConfigError);
}

TEST(SyntheticTest, CorpusHasDistinctCandidates) {
  const auto w = make_world(5);
  const auto c = make_corpus(w, 30, 4, 9);
  ASSERT_EQ(c.rows.size(), 30u);
  for (const auto& row : c.rows) {
    EXPECT_EQ(row.translations.size(), 4u);
    EXPECT_EQ(std::set<std::string>(row.translations.begin(), row.translations.end()).size(), 4u);
  }
  EXPECT_EQ(make_corpus(w, 30, 4, 9).rows, c.rows);
}

TEST(SyntheticTest, PreferencesFollowTrueScoresWithoutNoise) {
  const auto w = make_world(6);
  const auto d = make_preferences(w, 200, 0.0, 1);
  ASSERT_EQ(d.size(), 200u);
  for (const auto& r : d.records) EXPECT_GT(w.score(r.chosen), w.score(r.rejected));
  const auto noisy = make_preferences(w, 2000, 0.2, 1);
  double flipped = 0;
  for (const auto& r : noisy.records) flipped += w.score(r.chosen) < w.score(r.rejected);
  EXPECT_NEAR(flipped / 2000.0, 0.2, 0.03);
  EXPECT_THROW(make_preferences(w, 10, 1.5, 1), ConfigError);
}

TEST(SyntheticTest, LexiconCoversAllForms) {
  const auto w = make_world(7);
  const auto lex = lexicon_words(w);
  EXPECT_EQ(lex.at("english").size(), w.concepts.size());
  EXPECT_EQ(lex.at("hindi").size(), 2 * w.concepts.size());
}

}  // namespace
}  // namespace chai::synthetic
