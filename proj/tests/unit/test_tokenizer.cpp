#include <random>

#include <gtest/gtest.h>

#include "litelong/tokenizer.hpp"
#include "oracles.hpp"

using litelong::tokenize;

namespace {

std::string random_ascii_text(std::mt19937& rng, std::size_t words) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  static const std::vector<std::string> seps = {" ", ", ", ". ", "--", "\t", "\n", "!?", " (", ") ", "'", "_", "/"};
  std::string out;
  for (std::size_t w = 0; w < words; ++w) {
    const std::size_t len = 1 + rng() % 9;
    for (std::size_t i = 0; i < len; ++i) out += letters[rng() % letters.size()];
    out += seps[rng() % seps.size()];
  }
  return out;
}

}  // namespace

TEST(Tokenizer, EmptyInputGivesNoTokens) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  ,.;!  \n").empty());
  EXPECT_EQ(litelong::count_tokens(""), 0u);
}

TEST(Tokenizer, SplitsOnNonAlphanumericRunsAndLowercases) {
  EXPECT_EQ(tokenize("BM25 retrieval, BM25!"), (std::vector<std::string>{"bm25", "retrieval", "bm25"}));
  EXPECT_EQ(tokenize("state-of-the-art"), (std::vector<std::string>{"state", "of", "the", "art"}));
  EXPECT_EQ(tokenize("snake_case"), (std::vector<std::string>{"snake", "case"}));
}

TEST(Tokenizer, HundredWordParagraphMatchesRegexReference) {
  std::mt19937 rng(100);
  const std::string text = random_ascii_text(rng, 100);
  const auto got = tokenize(text);
  const auto want = oracle::regex_tokenize(text);
  ASSERT_EQ(got.size(), 100u);
  EXPECT_EQ(got, want);
}

TEST(Tokenizer, RandomAsciiTextMatchesRegexReference) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string text = random_ascii_text(rng, rng() % 60);
    ASSERT_EQ(tokenize(text), oracle::regex_tokenize(text)) << text;
  }
}

TEST(Tokenizer, UnicodeLettersAndDigitsAreWordCharacters) {
  EXPECT_EQ(tokenize("Ünïcode ÉTÉ café-au-lait"),
            (std::vector<std::string>{"ünïcode", "été", "café", "au", "lait"}));
  EXPECT_EQ(tokenize("Straße"), (std::vector<std::string>{"straße"}));
  EXPECT_EQ(tokenize("東京タワー、大阪"), (std::vector<std::string>{"東京タワー", "大阪"}));
  // Arabic-Indic digits are decimal digits.
  EXPECT_EQ(tokenize("x٣٤ y"), (std::vector<std::string>{"x٣٤", "y"}));
  // Punctuation and symbols outside ASCII separate tokens.
  EXPECT_EQ(tokenize("alpha—beta gamma¿delta"),
            (std::vector<std::string>{"alpha", "beta", "gamma", "delta"}));
}

TEST(Tokenizer, IdempotentOnJoinedOutput) {
  std::mt19937 rng(11);
  const std::vector<std::string> samples = {"Ünïcode ÉTÉ café-au-lait", "東京タワー、大阪", "BM25 retrieval, BM25!"};
  for (const auto& s : samples) EXPECT_EQ(tokenize(litelong::join_tokens(tokenize(s))), tokenize(s));
  for (int trial = 0; trial < 200; ++trial) {
    const auto text = random_ascii_text(rng, rng() % 40);
    const auto once = tokenize(text);
    EXPECT_EQ(tokenize(litelong::join_tokens(once)), once);
  }
}

TEST(Tokenizer, SpansPointAtSourceBytes) {
  const std::string text = "  Héllo, WORLD -- 42x ";
  const auto spans = litelong::tokenize_spans(text);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(text.substr(spans[0].begin, spans[0].end - spans[0].begin), "Héllo");
  EXPECT_EQ(spans[0].term, "héllo");
  EXPECT_EQ(text.substr(spans[1].begin, spans[1].end - spans[1].begin), "WORLD");
  EXPECT_EQ(spans[2].term, "42x");
  EXPECT_EQ(litelong::count_tokens(text), 3u);
}

TEST(Tokenizer, CountMatchesTokenizeOnRandomText) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto text = random_ascii_text(rng, rng() % 80);
    EXPECT_EQ(litelong::count_tokens(text), tokenize(text).size());
  }
}

TEST(Tokenizer, Utf8Validation) {
  EXPECT_TRUE(litelong::is_valid_utf8("plain"));
  EXPECT_TRUE(litelong::is_valid_utf8("caf\xC3\xA9 \xE6\x9D\xB1 \xF0\x9F\x98\x80"));
  EXPECT_FALSE(litelong::is_valid_utf8("\xC3\x28"));          // bad continuation
  EXPECT_FALSE(litelong::is_valid_utf8("\xC0\xAF"));          // overlong
  EXPECT_FALSE(litelong::is_valid_utf8("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(litelong::is_valid_utf8("\xF4\x90\x80\x80"));  // beyond U+10FFFF
  EXPECT_FALSE(litelong::is_valid_utf8("abc\xE6\x9D"));       // truncated
}
