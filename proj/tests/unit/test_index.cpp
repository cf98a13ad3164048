#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "litelong/error.hpp"
#include "litelong/inverted_index.hpp"
#include "litelong/tokenizer.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace litelong;

namespace {

Corpus corpus_of(const std::vector<std::pair<std::string, std::string>>& docs) {
  Corpus c;
  for (const auto& [id, text] : docs) c.add(id, text, "test");
  return c;
}

std::vector<std::pair<std::string, std::string>> fixture_docs() {
  std::vector<std::pair<std::string, std::string>> docs;
  for (const auto& j : testsupport::read_jsonl(testsupport::fixture("bm25_200docs.jsonl"))) {
    docs.emplace_back(j["id"].get<std::string>(), j["text"].get<std::string>());
  }
  return docs;
}

std::vector<std::string> fixture_queries() {
  std::vector<std::string> out;
  std::istringstream in(testsupport::read_file(testsupport::fixture("bm25_queries.txt")));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

const std::vector<std::pair<std::string, std::string>> kThreeDocs = {
    {"D1", "the cat"}, {"D2", "cat cat dog"}, {"D3", "dog"}};

Topic topic(const std::string& text) { return Topic{"T", "S", text, "", Origin::debater_1, 0}; }

}  // namespace

TEST(Index, PostingsForRepeatedTerm) {
  const Corpus c = corpus_of({{"only", "a b a"}});
  const InvertedIndex idx = build_index(c);
  ASSERT_NE(idx.postings("a"), nullptr);
  EXPECT_EQ(idx.postings("a")->entries, (std::vector<Posting>{{0, 2}}));
  EXPECT_EQ(idx.postings("b")->entries, (std::vector<Posting>{{0, 1}}));
  EXPECT_EQ(idx.postings("c"), nullptr);
  EXPECT_EQ(idx.doc_lengths()[0], 3u);
}

TEST(Index, ThreeDocumentScoresMatchHandComputation) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  EXPECT_DOUBLE_EQ(idx.avgdl(), 2.0);
  EXPECT_EQ(idx.postings("cat")->entries, (std::vector<Posting>{{0, 1}, {1, 2}}));
  const std::vector<std::string> q = {"cat"};
  const double idf = std::log(1.6);
  EXPECT_NEAR(idx.score(q, 0), idf, 1e-12);
  EXPECT_NEAR(idx.score(q, 0), 0.470003629246, 1e-12);
  EXPECT_NEAR(idx.score(q, 1), 0.566579717447, 1e-12);
  EXPECT_EQ(idx.score(q, 2), 0.0);
  EXPECT_EQ(bm25_score(idx, q, 1), idx.score(q, 1));
}

TEST(Index, RetrieveOrdersByScore) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  const RetrievalResult r = retrieve(idx, topic("cat"), 2);
  ASSERT_EQ(r.hits.size(), 2u);
  EXPECT_EQ(r.hits[0].doc_id, "D2");
  EXPECT_EQ(r.hits[1].doc_id, "D1");
  EXPECT_EQ(r.topic_id, "T");
}

TEST(Index, UnknownTermQueryHasNoHits) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  EXPECT_TRUE(retrieve(idx, topic("zzz"), 10).hits.empty());
  for (std::uint32_t d = 0; d < 3; ++d) EXPECT_EQ(idx.score(std::vector<std::string>{"zzz"}, d), 0.0);
}

TEST(Index, TopicWithoutTokensIsValidationError) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  EXPECT_THROW(retrieve(idx, topic(""), 10), ValidationError);
  EXPECT_THROW(retrieve(idx, topic(" ,;! "), 10), ValidationError);
  EXPECT_THROW(retrieve(idx, topic("cat"), 0), ValidationError);
}

TEST(Index, EmptyCorpusAndBadParamsRejected) {
  EXPECT_THROW(build_index(Corpus{}), ValidationError);
  EXPECT_THROW(build_index(corpus_of(kThreeDocs), Bm25Params{0.0, 0.75}), ValidationError);
  EXPECT_THROW(build_index(corpus_of(kThreeDocs), Bm25Params{1.2, 1.5}), ValidationError);
}

TEST(Index, ScoreGrowsWithTermFrequencyAtFixedLength) {
  // Every document has 10 tokens; only the count of "x" varies.
  std::vector<std::pair<std::string, std::string>> docs;
  for (int f = 1; f <= 8; ++f) {
    std::string text;
    for (int i = 0; i < 10; ++i) text += (i < f ? "x " : "pad" + std::to_string(i) + " ");
    docs.emplace_back("d" + std::to_string(f), text);
  }
  docs.emplace_back("none", "a b c d e f g h i j");
  const InvertedIndex idx = build_index(corpus_of(docs));
  const std::vector<std::string> q = {"x"};
  for (std::uint32_t d = 1; d < 8; ++d) EXPECT_GT(idx.score(q, d), idx.score(q, d - 1));
}

TEST(Index, RepeatedQueryTermsCountOnce) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  EXPECT_EQ(idx.score(std::vector<std::string>{"cat", "cat", "cat"}, 1), idx.score(std::vector<std::string>{"cat"}, 1));
  EXPECT_EQ(InvertedIndex::distinct_terms(std::vector<std::string>{"b", "a", "b", "c", "a"}),
            (std::vector<std::string>{"b", "a", "c"}));
}

TEST(Index, DuplicateTextsTieAndOrderById) {
  const InvertedIndex idx = build_index(corpus_of({{"zeta", "same words here"}, {"alpha", "same words here"},
                                                   {"mid", "same words here"}, {"other", "different text"}}));
  const RetrievalResult r = retrieve(idx, topic("same words"), 10);
  ASSERT_EQ(r.hits.size(), 3u);
  EXPECT_EQ(r.hits[0].doc_id, "alpha");
  EXPECT_EQ(r.hits[1].doc_id, "mid");
  EXPECT_EQ(r.hits[2].doc_id, "zeta");
  EXPECT_EQ(r.hits[0].score, r.hits[2].score);
}

TEST(Index, SnapshotRoundTripIsBitIdentical) {
  const InvertedIndex idx = build_index(corpus_of(fixture_docs()), {}, 3);
  std::ostringstream first;
  idx.write(first);
  std::istringstream in(first.str());
  const InvertedIndex back = InvertedIndex::read(in);
  std::ostringstream second;
  back.write(second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.n_docs(), idx.n_docs());
  EXPECT_EQ(back.avgdl(), idx.avgdl());
  for (const auto& q : fixture_queries()) {
    const auto terms = tokenize(q);
    const auto a = idx.search(terms, 256);
    const auto b = back.search(terms, 256);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].doc_id, b[i].doc_id);
      EXPECT_EQ(a[i].score, b[i].score);
    }
  }

  testsupport::TempDir dir;
  idx.save(dir / "x.llidx");
  EXPECT_EQ(testsupport::read_file(dir / "x.llidx"), first.str());
  EXPECT_EQ(InvertedIndex::load(dir / "x.llidx").total_postings(), idx.total_postings());
}

TEST(Index, CorruptSnapshotIsParseError) {
  const InvertedIndex idx = build_index(corpus_of(kThreeDocs));
  std::ostringstream out;
  idx.write(out);
  const std::string bytes = out.str();

  std::istringstream bad_magic("XXIDX1" + bytes.substr(6));
  EXPECT_THROW(InvertedIndex::read(bad_magic), ParseError);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(InvertedIndex::read(truncated), ParseError);
  std::istringstream trailing(bytes + "junk");
  EXPECT_THROW(InvertedIndex::read(trailing), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(InvertedIndex::read(empty), ParseError);
  EXPECT_THROW(InvertedIndex::load("/nonexistent/x.llidx"), IoError);
}

TEST(Index, BuildIsIndependentOfWorkerCount) {
  const Corpus c = corpus_of(fixture_docs());
  std::ostringstream one, four, seven;
  build_index(c, {}, 1).write(one);
  build_index(c, {}, 4).write(four);
  build_index(c, {}, 7).write(seven);
  EXPECT_EQ(one.str(), four.str());
  EXPECT_EQ(one.str(), seven.str());
}

TEST(Index, PostingsCountMatchesDistinctTermPairs) {
  const auto docs = fixture_docs();
  const InvertedIndex idx = build_index(corpus_of(docs), {}, 2);
  const oracle::BruteBm25 brute(docs);
  EXPECT_EQ(idx.total_postings(), brute.distinct_pairs());
  std::size_t sum = 0;
  for (const auto& term : idx.terms()) {
    const auto* list = idx.postings(term);
    ASSERT_NE(list, nullptr);
    for (std::size_t i = 1; i < list->entries.size(); ++i) {
      EXPECT_LT(list->entries[i - 1].doc_ordinal, list->entries[i].doc_ordinal);
    }
    sum += list->entries.size();
    EXPECT_EQ(idx.doc_frequency(term), brute.doc_frequency(term));
  }
  EXPECT_EQ(sum, idx.total_postings());
  EXPECT_TRUE(std::is_sorted(idx.terms().begin(), idx.terms().end()));
}

TEST(Index, TopKNeverExceedsMatchingDocuments) {
  std::mt19937 rng(5);
  std::vector<std::pair<std::string, std::string>> docs;
  for (int i = 0; i < 100; ++i) {
    std::string text = "common";
    for (int w = 0; w < 20; ++w) text += " t" + std::to_string(rng() % 300);
    docs.emplace_back("d" + std::to_string(i), text);
  }
  const InvertedIndex idx = build_index(corpus_of(docs));
  EXPECT_EQ(retrieve(idx, topic("common"), 256).hits.size(), 100u);
  EXPECT_LE(retrieve(idx, topic("t7 t99"), 256).hits.size(), 100u);
  EXPECT_EQ(retrieve(idx, topic("common"), 5).hits.size(), 5u);
}

TEST(Index, FixtureRankingsMatchBruteForceReference) {
  const auto docs = fixture_docs();
  const InvertedIndex idx = build_index(corpus_of(docs), {}, 3);
  const oracle::BruteBm25 brute(docs);
  EXPECT_NEAR(idx.avgdl(), brute.avgdl(), 1e-12);
  const auto queries = fixture_queries();
  ASSERT_EQ(queries.size(), 50u);
  for (const auto& q : queries) {
    const auto mine = retrieve(idx, topic(q), 256).hits;
    const auto want = brute.rank(oracle::regex_tokenize(q), 256);
    ASSERT_EQ(mine.size(), want.size()) << q;
    for (std::size_t i = 0; i < mine.size(); ++i) {
      EXPECT_EQ(mine[i].doc_id, want[i].doc_id) << q << " rank " << i;
      EXPECT_LE(std::abs(mine[i].score - want[i].score), 1e-9 * std::abs(want[i].score)) << q;
    }
  }
  // The fixture's sentinel query shares no term with any document.
  EXPECT_TRUE(retrieve(idx, topic(queries[7]), 256).hits.empty());
}
