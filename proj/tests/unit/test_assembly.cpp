#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "litelong/assembly.hpp"
#include "litelong/error.hpp"
#include "litelong/tokenizer.hpp"
#include "nextlong_reference.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace litelong;

namespace {

std::string words(std::size_t n, const std::string& stem, std::size_t vocab = 50) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += (i % 11 == 0) ? ". " : " ";
    out += stem + std::to_string(i % vocab);
  }
  return out;
}

struct Fixture {
  Corpus corpus;
  RetrievalResult result;
};

// One hit per length, ids h000.., all scores equal-ish.
Fixture with_lengths(const std::vector<std::size_t>& lengths) {
  Fixture f;
  f.result.topic_id = "TOPIC";
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::string id = "h" + std::to_string(1000 + i).substr(1);
    f.corpus.add(id, words(lengths[i], "w" + std::to_string(i) + "x"), "test");
    f.result.hits.push_back({id, 10.0 - static_cast<double>(i) * 1e-3});
  }
  return f;
}

std::vector<std::string> packing_order(const std::vector<LongSample>& samples) {
  std::vector<std::string> order;
  for (const auto& s : samples) {
    for (const auto& seg : s.segments) order.push_back(seg.doc_id);
  }
  return order;
}

void expect_matches_packing_oracle(const Fixture& f, std::size_t target, std::uint64_t seed) {
  const ShuffleResult r = assemble_shuffle(f.result, f.corpus, target, seed, /*allow_short=*/true);
  const auto order = packing_order(r.samples);
  // Every hit is used exactly once: the overflow tail is dropped, never carried.
  ASSERT_EQ(std::multiset<std::string>(order.begin(), order.end()).size(), f.result.hits.size());
  ASSERT_EQ(std::set<std::string>(order.begin(), order.end()).size(), f.result.hits.size());
  std::vector<std::size_t> lengths;
  for (const auto& id : order) lengths.push_back(f.corpus.get(id).token_count);
  const auto want = oracle::simulate_packing(lengths, target);
  ASSERT_EQ(r.samples.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(r.samples[i].token_count, want[i]) << i;
  for (const auto& s : r.samples) {
    std::size_t sum = 0;
    for (std::size_t k = 0; k < s.segments.size(); ++k) {
      sum += s.segments[k].length();
      EXPECT_EQ(s.segments[k].start_token, 0u);
      // Only the last segment of a sample may be cut.
      if (k + 1 < s.segments.size()) {
        EXPECT_EQ(s.segments[k].end_token, f.corpus.get(s.segments[k].doc_id).token_count);
      }
    }
    EXPECT_EQ(sum, s.token_count);
  }
}

}  // namespace

TEST(Shuffle, ThreeFiveTokenDocsAtTargetTen) {
  const Fixture f = with_lengths({5, 5, 5});
  const ShuffleResult strict = assemble_shuffle(f.result, f.corpus, 10, 1);
  ASSERT_EQ(strict.samples.size(), 1u);
  EXPECT_EQ(strict.samples[0].token_count, 10u);
  EXPECT_EQ(strict.samples[0].segments.size(), 2u);
  EXPECT_EQ(strict.dropped_short, 1u);
  const ShuffleResult lenient = assemble_shuffle(f.result, f.corpus, 10, 1, true);
  ASSERT_EQ(lenient.samples.size(), 2u);
  EXPECT_EQ(lenient.samples[1].token_count, 5u);
  EXPECT_EQ(lenient.dropped_short, 0u);
}

TEST(Shuffle, TwoHundredFiftySixThousandTokenDocsMakeTwoFullSamples) {
  const Fixture f = with_lengths(std::vector<std::size_t>(256, 1000));
  const ShuffleResult r = assemble_shuffle(f.result, f.corpus, 128000, 99);
  ASSERT_EQ(r.samples.size(), 2u);
  for (const auto& s : r.samples) {
    EXPECT_EQ(s.token_count, 128000u);
    EXPECT_EQ(s.segments.size(), 128u);
  }
  EXPECT_EQ(r.dropped_short, 0u);
  expect_matches_packing_oracle(f, 128000, 99);
}

TEST(Shuffle, VariedLengthsMatchPackingReference) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> lengths(5 + rng() % 60);
    for (auto& l : lengths) l = 1 + rng() % 900;
    const Fixture f = with_lengths(lengths);
    expect_matches_packing_oracle(f, 200 + rng() % 2000, rng());
  }
}

TEST(Shuffle, NoDocumentRepeatsWithinOrAcrossSamples) {
  std::vector<std::size_t> lengths(80);
  for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = 100 + (i * 37) % 400;
  const Fixture f = with_lengths(lengths);
  const ShuffleResult r = assemble_shuffle(f.result, f.corpus, 1024, 5);
  std::set<std::string> seen;
  for (const auto& s : r.samples) {
    EXPECT_EQ(s.token_count, 1024u);
    for (const auto& seg : s.segments) EXPECT_TRUE(seen.insert(seg.doc_id).second) << seg.doc_id;
  }
  EXPECT_GT(r.samples.size(), 10u);
}

TEST(Shuffle, DeterministicPerSeedAndSeedSensitive) {
  std::vector<std::size_t> lengths(40, 300);
  const Fixture f = with_lengths(lengths);
  const auto a = assemble_shuffle(f.result, f.corpus, 1000, 42);
  const auto b = assemble_shuffle(f.result, f.corpus, 1000, 42);
  const auto c = assemble_shuffle(f.result, f.corpus, 1000, 43);
  EXPECT_EQ(packing_order(a.samples), packing_order(b.samples));
  EXPECT_NE(packing_order(a.samples), packing_order(c.samples));
  EXPECT_EQ(a.samples[0].sample_id, "TOPIC-s000");
  EXPECT_EQ(a.samples[0].seed, 42u);
}

TEST(Shuffle, EmptyResultWarnsAndZeroTargetRejected) {
  const Fixture f = with_lengths({5});
  const RetrievalResult empty{"EMPTY", {}};
  const auto r = assemble_shuffle(empty, f.corpus, 10, 1);
  EXPECT_TRUE(r.samples.empty());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_THROW(assemble_shuffle(f.result, f.corpus, 0, 1), ValidationError);
}

TEST(ChunkRanges, SplitsWithShortTail) {
  EXPECT_EQ(chunk_ranges(10, 4), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 4}, {4, 8}, {8, 10}}));
  EXPECT_TRUE(chunk_ranges(0, 4).empty());
  EXPECT_EQ(chunk_ranges(8, 4).size(), 2u);
  EXPECT_THROW(chunk_ranges(8, 0), ValidationError);
}

TEST(NextLong, SingleHitYieldsChunkedSourceOnly) {
  const Fixture f = with_lengths({1000});
  const InvertedIndex idx = build_index(f.corpus);
  NextLongOptions opt{4096, 256, 3, 64};
  const auto r = assemble_nextlong(f.result, f.corpus, idx, opt, 7);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.sample.token_count, 1000u);
  ASSERT_EQ(r.sample.segments.size(), 4u);
  for (const auto& s : r.sample.segments) EXPECT_EQ(s.role, SegmentRole::meta_chunk);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(NextLong, EightMetaChunksEachPrecededByThreeNegatives) {
  // Four documents of 8 chunks each: the source contributes 8 meta-chunks and
  // the other 24 chunks are exactly enough negatives.
  const std::size_t c = 128;
  const Fixture f = with_lengths({8 * c, 8 * c, 8 * c, 8 * c});
  const InvertedIndex idx = build_index(f.corpus);
  NextLongOptions opt{32 * c, c, 3, 64};
  const auto r = assemble_nextlong(f.result, f.corpus, idx, opt, 1234);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.sample.token_count, 32 * c);
  ASSERT_EQ(r.sample.segments.size(), 32u);
  std::string source;
  std::size_t meta_index = 0;
  std::set<std::pair<std::string, std::size_t>> negatives;
  for (std::size_t i = 0; i < 32; ++i) {
    const Segment& s = r.sample.segments[i];
    EXPECT_EQ(s.length(), c);
    if (i % 4 == 3) {
      ASSERT_EQ(s.role, SegmentRole::meta_chunk) << i;
      if (source.empty()) source = s.doc_id;
      EXPECT_EQ(s.doc_id, source);
      EXPECT_EQ(s.start_token, meta_index++ * c);
    } else {
      ASSERT_EQ(s.role, SegmentRole::hard_negative) << i;
      EXPECT_TRUE(negatives.insert({s.doc_id, s.start_token}).second);
    }
  }
  for (const auto& [doc, start] : negatives) EXPECT_NE(doc, source);
  EXPECT_EQ(negatives.size(), 24u);
}

TEST(NextLong, SourceLongerThanTargetIsTruncatedWithWarning) {
  const Fixture f = with_lengths({5000});
  const InvertedIndex idx = build_index(f.corpus);
  const auto r = assemble_nextlong(f.result, f.corpus, idx, NextLongOptions{1000, 256, 3, 64}, 1);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.sample.token_count, 1000u);
  ASSERT_EQ(r.sample.segments.size(), 4u);
  EXPECT_EQ(r.sample.segments.back().end_token, 1000u);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("exceeds target"), std::string::npos);
}

TEST(NextLong, RejectsEmptyResultAndBadOptions) {
  const Fixture f = with_lengths({10});
  const InvertedIndex idx = build_index(f.corpus);
  EXPECT_THROW(assemble_nextlong(RetrievalResult{"E", {}}, f.corpus, idx, {}, 1), ValidationError);
  EXPECT_THROW(assemble_nextlong(f.result, f.corpus, idx, NextLongOptions{100, 0, 3, 64}, 1), ValidationError);
}

TEST(NextLong, NegativesAreTheTopScoringUnusedChunks) {
  std::vector<std::pair<std::string, std::string>> docs;
  Corpus corpus;
  for (const auto& j : testsupport::read_jsonl(testsupport::fixture("nextlong_50docs.jsonl"))) {
    docs.emplace_back(j["id"].get<std::string>(), j["text"].get<std::string>());
    corpus.add(docs.back().first, docs.back().second, "fixture");
  }
  const InvertedIndex idx = build_index(corpus);
  const oracle::BruteBm25 brute(docs);
  const NextLongOptions opt{8192, 512, 3, 64};

  std::size_t checked = 0;
  std::size_t negatives = 0;
  for (const auto& tj : testsupport::read_jsonl(testsupport::fixture("nextlong_topics.jsonl"))) {
    const Topic topic{tj["topic_id"], "S", tj["text"], "", Origin::debater_1, 0};
    const RetrievalResult result = retrieve(idx, topic, 256);
    if (result.hits.size() < 2) continue;
    const auto r = assemble_nextlong(result, corpus, idx, opt, 1000 + checked);
    const auto check = testsupport::check_nextlong_sample(r.sample, result, brute, opt);
    for (const auto& f : check.failures) ADD_FAILURE() << f;
    EXPECT_GE(check.meta_chunks, 1u);
    negatives += check.negatives_checked;
    ++checked;
  }
  EXPECT_GE(checked, 8u);
  EXPECT_GT(negatives, 30u);
}

TEST(NextLong, CustomSimilarityIsHonoured) {
  // A similarity that prefers chunks from the lexicographically last document.
  class LastDocFirst : public ChunkSimilarity {
   public:
    void prepare(const std::vector<Chunk>& pool) override { pool_ = pool; }
    double score(const std::vector<std::string>&, std::size_t chunk) const override {
      return pool_[chunk].doc_id == "h002" ? 1.0 : 0.0;
    }
    std::vector<Chunk> pool_;
  } sim;
  const Fixture f = with_lengths({300, 300, 300});
  const InvertedIndex idx = build_index(f.corpus);
  // Seed picks some source; when it is not h002, the first negative must come from h002.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = assemble_nextlong(f.result, f.corpus, idx, NextLongOptions{600, 100, 1, 64}, seed, &sim);
    const auto& segs = r.sample.segments;
    ASSERT_GE(segs.size(), 2u);
    if (segs[1].doc_id != "h002") {
      EXPECT_EQ(segs[0].doc_id, "h002");
    }
  }
}

TEST(Materialize, RetokenizedTextHasTokenCount) {
  std::vector<std::size_t> lengths(30);
  for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = 50 + i * 13;
  const Fixture f = with_lengths(lengths);
  const auto r = assemble_shuffle(f.result, f.corpus, 700, 3, true);
  for (const auto& s : r.samples) {
    const std::string text = materialize_text(s, f.corpus);
    EXPECT_EQ(count_tokens(text), s.token_count);
    EXPECT_EQ(count_tokens(materialize_text(s, f.corpus, " | ")), s.token_count);
  }
}

TEST(Materialize, OutOfRangeSegmentIsConsistencyError) {
  const Fixture f = with_lengths({10});
  LongSample s;
  s.segments.push_back({"h000", 0, 11, SegmentRole::document});
  EXPECT_THROW(materialize_text(s, f.corpus), ConsistencyError);
}

TEST(WriteSamples, ZeroSamplesGiveEmptyFile) {
  const Fixture f = with_lengths({10});
  testsupport::TempDir dir;
  const auto m = write_samples({}, f.corpus, dir / "samples.jsonl", {});
  EXPECT_EQ(m.samples, 0u);
  EXPECT_EQ(m.total_tokens, 0u);
  EXPECT_TRUE(testsupport::read_file(dir / "samples.jsonl").empty());
}

TEST(WriteSamples, TenSamplesOf4096Tokens) {
  // 5 docs per sample, the fifth cut at 96 tokens.
  const Fixture f = with_lengths(std::vector<std::size_t>(50, 1000));
  const auto r = assemble_shuffle(f.result, f.corpus, 4096, 11);
  ASSERT_EQ(r.samples.size(), 10u);
  testsupport::TempDir dir;
  SamplesManifest base;
  base.target_tokens = 4096;
  base.config_hash = "abc";
  const auto m = write_samples(r.samples, f.corpus, dir / "samples.jsonl", base);
  EXPECT_EQ(m.samples, 10u);
  EXPECT_EQ(m.total_tokens, 40960u);
  EXPECT_EQ(m.to_json()["config_hash"], "abc");
  const auto lines = testsupport::read_jsonl(dir / "samples.jsonl");
  ASSERT_EQ(lines.size(), 10u);
  for (const auto& j : lines) {
    EXPECT_EQ(j["token_count"], 4096);
    EXPECT_EQ(count_tokens(j["text"].get<std::string>()), 4096u);
    EXPECT_EQ(j["strategy"], "shuffle_concat");
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "samples.jsonl.tmp"));
}

TEST(WriteSamples, FailureRemovesTemporaryFile) {
  const Fixture f = with_lengths({10});
  LongSample bad;
  bad.segments.push_back({"h000", 0, 50, SegmentRole::document});
  testsupport::TempDir dir;
  EXPECT_THROW(write_samples({bad}, f.corpus, dir / "samples.jsonl", {}), ConsistencyError);
  EXPECT_FALSE(std::filesystem::exists(dir / "samples.jsonl"));
  EXPECT_FALSE(std::filesystem::exists(dir / "samples.jsonl.tmp"));
}

TEST(WriteSamples, JoinerMustNotCarryTokens) {
  const Fixture f = with_lengths({10});
  testsupport::TempDir dir;
  EXPECT_THROW(write_samples({}, f.corpus, dir / "s.jsonl", {}, "x"), ValidationError);
  EXPECT_THROW(write_samples({}, f.corpus, dir / "s.jsonl", {}, ""), ValidationError);
  EXPECT_NO_THROW(write_samples({}, f.corpus, dir / "s.jsonl", {}, "\n\n"));
}
