#include <gtest/gtest.h>

#include "chai/rng.hpp"
#include "chai/text.hpp"

namespace chai {
namespace {

TEST(TextTest, NormalizeComposesAndTrims) {
  // "e" + combining acute -> precomposed U+00E9
  EXPECT_EQ(text::normalize("  cafe\xCC\x81\t\n"), "caf\xC3\xA9");
  EXPECT_EQ(text::normalize("\xE3\x80\x80x\xE3\x80\x80"), "x");  // ideographic space
}

TEST(TextTest, CodePointsSplitsMultibyte) {
  const auto cps = text::code_points("a\xC3\xA9\xE0\xA4\x85");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], "\xC3\xA9");
  EXPECT_EQ(cps[2], "\xE0\xA4\x85");
}

TEST(TextTest, InvalidBytesPassThroughOneAtATime) {
  const auto cps = text::code_points("a\xFF" "b");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], "\xFF");
}

TEST(TextTest, WhitespaceHelpers) {
  EXPECT_EQ(text::split_whitespace("  ek  do\tteen \n"), (std::vector<std::string>{"ek", "do", "teen"}));
  EXPECT_TRUE(text::split_whitespace(" \t ").empty());
  EXPECT_EQ(text::remove_whitespace(" a b c "), "abc");
  EXPECT_TRUE(text::is_blank(" \n\t"));
  EXPECT_FALSE(text::is_blank(" x "));
}

TEST(TextTest, LowercaseAndPunctuation) {
  EXPECT_EQ(text::lowercase("ÉCOLE Movie"), "école movie");
  EXPECT_EQ(text::strip_punctuation("\"yaar!!\""), "yaar");
  EXPECT_EQ(text::strip_punctuation("..."), "");
  EXPECT_EQ(text::strip_punctuation("don't"), "don't");
}

TEST(TextTest, HashesAreStable) {
  EXPECT_EQ(text::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(text::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(text::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(TextTest, ReadMissingFileThrows) {
  EXPECT_THROW(text::read_file("/nonexistent/chai/file"), Error);
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(RngTest, UniformAndIndexRanges) {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.index(7), 7u);
  }
}

TEST(RngTest, DeriveSeedSeparatesKeysAndSeeds) {
  EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
  EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
}

TEST(RngTest, NormalMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

}  // namespace
}  // namespace chai
