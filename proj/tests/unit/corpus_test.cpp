#include <gtest/gtest.h>

#include <set>

#include "chai/corpus.hpp"
#include "chai/jsonl.hpp"
#include "chai/text.hpp"
#include "test_util.hpp"

namespace chai::corpus {
namespace {

using chai::testing::TempDir;

TEST(CorpusTest, LoadsJsonlNormalizingAndDeduplicating) {
  TempDir dir;
  const auto path = dir.write("c.jsonl",
                              R"({"row_id":"r1","source":"  Hello  ","translations":["namaste dost","namaste dost ","hi dost"]})" "\n"
                              "\n"
                              R"({"row_id":"r2","source":"   ","translations":["x"]})" "\n"
                              R"({"row_id":"r3","source":"bye","translations":["", "  "]})" "\n");
  const auto c = load_corpus(path, CorpusFormat::kJsonl);
  ASSERT_EQ(c.rows.size(), 1u);
  EXPECT_EQ(c.rows[0].source_text, "Hello");
  EXPECT_EQ(c.rows[0].translations, (std::vector<std::string>{"namaste dost", "hi dost"}));
  EXPECT_EQ(c.rows[0].source_lang, "english");
  EXPECT_EQ(c.rows[0].target_lang, "hinglish");
  EXPECT_EQ(c.report.records_read, 3u);
  EXPECT_EQ(c.report.rows_loaded, 1u);
  EXPECT_EQ(c.report.dropped_empty_source, 1u);
  EXPECT_EQ(c.report.dropped_no_translations, 1u);
  EXPECT_EQ(c.report.duplicate_translations_removed, 1u);
  EXPECT_EQ(c.pair_count(), 2u);
}

TEST(CorpusTest, MalformedRecordReportsLineNumber) {
  TempDir dir;
  const auto path = dir.write("c.jsonl", R"({"row_id":"r1","source":"a","translations":["b"]})" "\n"
                                         R"({"row_id":"r2","source":"a"})" "\n");
  try {
    load_corpus(path, CorpusFormat::kJsonl);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
}

TEST(CorpusTest, InvalidJsonReportsLineNumber) {
  TempDir dir;
  const auto path = dir.write("c.jsonl", "{\"row_id\":\"r1\"\n");
  try {
    load_corpus(path, CorpusFormat::kJsonl);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos) << e.what();
  }
}

TEST(CorpusTest, DuplicateRowIdIsAnError) {
  TempDir dir;
  const auto path = dir.write("c.jsonl", R"({"row_id":"r1","source":"a","translations":["b"]})" "\n"
                                         R"({"row_id":"r1","source":"c","translations":["d"]})" "\n");
  EXPECT_THROW(load_corpus(path, CorpusFormat::kJsonl), Error);
}

TEST(CorpusTest, MissingFileIsAnError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::kJsonl), Error);
  EXPECT_THROW(load_corpus("/nonexistent/corpus.tsv", CorpusFormat::kTsv), Error);
}

TEST(CorpusTest, TsvGroupsTranslationsBySource) {
  TempDir dir;
  const auto path = dir.write("mixmt.tsv",
                              "source\ttranslation\n"
                              "I am home\tmain ghar pe hoon\n"
                              "I am home\tmain ghar par hoon\r\n"
                              "Good night\tshubh ratri\n");
  const auto c = load_corpus(path, CorpusFormat::kTsv);
  ASSERT_EQ(c.rows.size(), 2u);
  EXPECT_EQ(c.rows[0].row_id, "mixmt-1");
  EXPECT_EQ(c.rows[0].origin, "mixmt");
  EXPECT_EQ(c.rows[0].translations.size(), 2u);
  EXPECT_EQ(c.rows[1].translations, std::vector<std::string>{"shubh ratri"});
  EXPECT_EQ(c.report.records_read, 3u);
}

TEST(CorpusTest, TsvRejectsWrongColumnCount) {
  TempDir dir;
  EXPECT_THROW(load_corpus(dir.write("a.tsv", "one column only\n"), CorpusFormat::kTsv), Error);
  EXPECT_THROW(load_corpus(dir.write("b.tsv", "a\tb\tc\n"), CorpusFormat::kTsv), Error);
}

TEST(CorpusTest, ParseFormat) {
  EXPECT_EQ(parse_corpus_format("tsv"), CorpusFormat::kTsv);
  EXPECT_THROW(parse_corpus_format("csv"), ConfigError);
}

TEST(CorpusTest, SaveLoadRoundTrip) {
  TempDir dir;
  auto c = make_corpus({{"a", "src", {"t1", "t2"}, "english", "hinglish", "unit"}});
  save_corpus_jsonl(dir.file("c.jsonl"), c);
  const auto back = load_corpus(dir.file("c.jsonl"), CorpusFormat::kJsonl);
  EXPECT_EQ(back.rows, c.rows);
}

ParallelCorpus three_row_corpus() {
  return make_corpus({{"r1", "s1", {"a", "b", "c", "d"}},
                      {"r2", "s2", {"x"}},
                      {"r3", "s3", {"p", "q"}}});
}

TEST(PairingTest, AllPairsEnumeratesUnorderedPairs) {
  const auto res = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 1);
  EXPECT_EQ(res.pairs.size(), 6u + 1u);
  EXPECT_EQ(res.skipped_rows, 1u);
  std::set<std::string> ids;
  for (const auto& p : res.pairs) {
    EXPECT_NE(p.candidate_a, p.candidate_b);
    EXPECT_TRUE(ids.insert(p.pair_id).second);
  }
  EXPECT_EQ(res.pairs.front().pair_id, "r1:0-1");
}

TEST(PairingTest, CanonicalUndoesTheDisplaySwap) {
  const auto res = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 5);
  for (const auto& p : res.pairs) {
    const auto [first, second] = p.canonical();
    if (p.row_id == "r1" && p.pair_id == "r1:0-1") {
      EXPECT_EQ(first, "a");
      EXPECT_EQ(second, "b");
    }
    const auto s = p.swapped();
    EXPECT_EQ(s.candidate_a, p.candidate_b);
    EXPECT_NE(s.swap_applied, p.swap_applied);
    EXPECT_EQ(s.canonical(), p.canonical());
  }
}

TEST(PairingTest, SwapRateIsAboutHalf) {
  std::vector<ParallelRow> rows;
  for (int i = 0; i < 500; ++i) rows.push_back({"r" + std::to_string(i), "s", {"a", "b", "c"}});
  const auto res = make_preference_pairs(make_corpus(rows), PairingMode::all_pairs(), 9);
  double swapped = 0;
  for (const auto& p : res.pairs) swapped += p.swap_applied;
  EXPECT_NEAR(swapped / static_cast<double>(res.pairs.size()), 0.5, 0.05);
}

TEST(PairingTest, DeterministicForSeed) {
  const auto a = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 3);
  const auto b = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 3);
  EXPECT_EQ(a.pairs, b.pairs);
}

TEST(PairingTest, SampledKeepsNInCorpusOrder) {
  const auto all = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 3);
  const auto some = make_preference_pairs(three_row_corpus(), PairingMode::sampled(3), 3);
  ASSERT_EQ(some.pairs.size(), 3u);
  std::size_t pos = 0;
  for (const auto& p : some.pairs) {
    while (pos < all.pairs.size() && all.pairs[pos].pair_id != p.pair_id) ++pos;
    ASSERT_LT(pos, all.pairs.size()) << "sampled pairs out of order";
    EXPECT_EQ(all.pairs[pos], p);
  }
  EXPECT_EQ(make_preference_pairs(three_row_corpus(), PairingMode::sampled(100), 3).pairs.size(), 7u);
  EXPECT_THROW(make_preference_pairs(three_row_corpus(), PairingMode::sampled(0), 3), ConfigError);
}

TEST(PairingTest, PairsRoundTripThroughJsonl) {
  TempDir dir;
  const auto res = make_preference_pairs(three_row_corpus(), PairingMode::all_pairs(), 3);
  save_pairs(dir.file("p.jsonl"), res.pairs);
  EXPECT_EQ(load_pairs(dir.file("p.jsonl")), res.pairs);
}

TEST(PairingTest, IdenticalCandidatesAreRejectedOnLoad) {
  TempDir dir;
  const auto path = dir.write("p.jsonl", R"({"pair_id":"x","row_id":"r","source":"s","candidate_a":"a","candidate_b":"a","swap_applied":false})" "\n");
  EXPECT_THROW(load_pairs(path), Error);
}

}  // namespace
}  // namespace chai::corpus
