#include <random>

#include <gtest/gtest.h>

#include "litelong/corpus.hpp"
#include "litelong/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace litelong;
using testsupport::TempDir;
using testsupport::write_file;
using json = nlohmann::json;

namespace {

std::string line(const std::string& id, const std::string& text, const std::string& source = "web") {
  return json{{"id", id}, {"text", text}, {"source", source}}.dump() + "\n";
}

}  // namespace

TEST(Corpus, ThreeValidLines) {
  TempDir dir;
  write_file(dir / "c.jsonl", line("a", "one two") + line("b", "three") + line("c", "four five six"));
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"});
  EXPECT_EQ(corpus.stats().doc_count, 3u);
  EXPECT_EQ(corpus.stats().total_tokens, 6u);
  EXPECT_DOUBLE_EQ(corpus.stats().avg_doc_tokens, 2.0);
  EXPECT_EQ(corpus.at(0).doc_id, "a");
  EXPECT_EQ(corpus.at(2).doc_id, "c");
}

TEST(Corpus, DuplicateIdNamesBothLines) {
  TempDir dir;
  write_file(dir / "c.jsonl", line("a", "x") + line("dup", "y") + line("b", "z") + line("c", "w") + line("dup", "v"));
  try {
    ingest_corpus({dir / "c.jsonl"});
    FAIL() << "expected a duplicate-id error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c.jsonl:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("c.jsonl:5"), std::string::npos) << msg;
  }
}

TEST(Corpus, DuplicateAcrossFilesNamesBothFiles) {
  TempDir dir;
  write_file(dir / "a.jsonl", line("x", "one"));
  write_file(dir / "b.jsonl", line("y", "two") + line("x", "three"));
  try {
    ingest_corpus({dir / "a.jsonl", dir / "b.jsonl"}, 2);
    FAIL() << "expected a duplicate-id error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a.jsonl:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("b.jsonl:2"), std::string::npos) << msg;
  }
}

TEST(Corpus, SyntheticThousandDocsTotal210000Tokens) {
  // Generated text is ASCII so the regex reference tokenizer applies.
  std::mt19937 rng(210);
  // Paired lengths 210 +/- d keep the sum at exactly 210,000.
  std::vector<std::size_t> lengths(1000);
  for (std::size_t i = 0; i < lengths.size(); i += 2) {
    const std::size_t d = rng() % 100;
    lengths[i] = 210 + d;
    lengths[i + 1] = 210 - d;
  }
  TempDir dir;
  std::string body;
  std::size_t oracle_total = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::string text;
    for (std::size_t w = 0; w < lengths[i]; ++w) {
      text += "w" + std::to_string(rng() % 5000) + (w % 7 == 6 ? ". " : " ");
    }
    oracle_total += oracle::regex_tokenize(text).size();
    body += line("doc" + std::to_string(i), text, i % 2 ? "fineweb-edu" : "cosmopedia-v2");
  }
  ASSERT_EQ(oracle_total, 210000u);
  write_file(dir / "c.jsonl", body);
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"}, 4);
  const CorpusStats stats = corpus.stats();
  EXPECT_EQ(stats.doc_count, 1000u);
  EXPECT_EQ(stats.total_tokens, 210000u);
  EXPECT_DOUBLE_EQ(stats.avg_doc_tokens, 210.0);
  EXPECT_EQ(stats.source_breakdown.at("fineweb-edu"), 500u);
  EXPECT_EQ(stats.source_breakdown.at("cosmopedia-v2"), 500u);
  std::size_t sum = 0;
  for (const auto& d : corpus.documents()) sum += d.token_count;
  EXPECT_EQ(sum, stats.total_tokens);
}

TEST(Corpus, GetDocument) {
  TempDir dir;
  write_file(dir / "c.jsonl", line("a", "x y"));
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"});
  EXPECT_EQ(corpus.get("a").token_count, 2u);
  EXPECT_EQ(corpus.get("a").text, corpus.get("a").text);
  EXPECT_THROW(corpus.get("missing"), NotFoundError);
  EXPECT_FALSE(corpus.ordinal("missing").has_value());
}

TEST(Corpus, TextRoundTripsByteForByte) {
  TempDir dir;
  const std::vector<std::string> texts = {"plain text", "caf\xC3\xA9 \"quoted\"\ttab", "line\nbreak \\ backslash",
                                          "emoji \xF0\x9F\x98\x80 and \xE6\x9D\xB1\xE4\xBA\xAC"};
  std::string body;
  for (std::size_t i = 0; i < texts.size(); ++i) body += line("t" + std::to_string(i), texts[i]);
  write_file(dir / "c.jsonl", body);
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"});
  // Re-read the file directly as the reference.
  for (const auto& j : testsupport::read_jsonl(dir / "c.jsonl")) {
    EXPECT_EQ(corpus.get(j["id"].get<std::string>()).text, j["text"].get<std::string>());
  }
}

TEST(Corpus, MalformedJsonNamesFileAndLine) {
  TempDir dir;
  write_file(dir / "bad.jsonl", line("a", "ok") + "{\"id\": \"b\", \"text\": \n");
  try {
    ingest_corpus({dir / "bad.jsonl"});
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, MissingOrMistypedFieldsAreParseErrors) {
  TempDir dir;
  write_file(dir / "a.jsonl", "{\"text\": \"no id\"}\n");
  EXPECT_THROW(ingest_corpus({dir / "a.jsonl"}), ParseError);
  write_file(dir / "b.jsonl", "{\"id\": 3, \"text\": \"numeric id\"}\n");
  EXPECT_THROW(ingest_corpus({dir / "b.jsonl"}), ParseError);
  write_file(dir / "c.jsonl", "[1, 2]\n");
  EXPECT_THROW(ingest_corpus({dir / "c.jsonl"}), ParseError);
}

TEST(Corpus, InvalidUtf8IsRejected) {
  TempDir dir;
  write_file(dir / "c.jsonl", "{\"id\": \"a\", \"text\": \"bad \xC3\x28 bytes\"}\n");
  EXPECT_THROW(ingest_corpus({dir / "c.jsonl"}), ParseError);
}

TEST(Corpus, BlankTextIsSkippedAndReported) {
  TempDir dir;
  write_file(dir / "c.jsonl", line("a", "kept") + "\n" + line("b", "   \t ") + line("c", "") + line("d", "also kept"));
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"});
  EXPECT_EQ(corpus.size(), 2u);
  ASSERT_EQ(corpus.skipped().size(), 3u);
  EXPECT_EQ(corpus.skipped()[0].line, 2u);
  EXPECT_EQ(corpus.skipped()[1].line, 3u);
  EXPECT_EQ(corpus.skipped()[2].line, 4u);
  write_skip_report(corpus.skipped(), dir / "skips.jsonl");
  const auto report = testsupport::read_jsonl(dir / "skips.jsonl");
  ASSERT_EQ(report.size(), 3u);
  EXPECT_EQ(report[1]["line"], 3);
  EXPECT_FALSE(report[1]["reason"].get<std::string>().empty());
  EXPECT_NE(report[1]["file"].get<std::string>().find("c.jsonl"), std::string::npos);
}

TEST(Corpus, SourceDefaultsAndCrlf) {
  TempDir dir;
  write_file(dir / "c.jsonl", "{\"id\": \"a\", \"text\": \"x\"}\r\n{\"id\": \"b\", \"text\": \"y\", \"source\": \"s\"}\r\n");
  const Corpus corpus = ingest_corpus({dir / "c.jsonl"});
  EXPECT_EQ(corpus.get("a").source, "unknown");
  EXPECT_EQ(corpus.get("b").source, "s");
}

TEST(Corpus, IngestionIsDeterministicAcrossRunsAndWorkerCounts) {
  TempDir dir;
  std::vector<std::filesystem::path> files;
  for (int f = 0; f < 5; ++f) {
    std::string body;
    for (int i = 0; i < 40; ++i) body += line("f" + std::to_string(f) + "-" + std::to_string(i), "w" + std::to_string(i * f) + " z");
    files.push_back(dir / ("part" + std::to_string(f) + ".jsonl"));
    write_file(files.back(), body);
  }
  const Corpus one = ingest_corpus(files, 1);
  const Corpus many = ingest_corpus(files, 4);
  const Corpus again = ingest_corpus(files, 3);
  ASSERT_EQ(one.size(), 200u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one.at(i).doc_id, many.at(i).doc_id);
    EXPECT_EQ(one.at(i).doc_id, again.at(i).doc_id);
  }
  EXPECT_EQ(one.stats().total_tokens, many.stats().total_tokens);
  EXPECT_EQ(one.at(0).doc_id, "f0-0");
  EXPECT_EQ(one.at(199).doc_id, "f4-39");
}

TEST(Corpus, MissingFileIsIoError) {
  EXPECT_THROW(ingest_corpus({"/nonexistent/corpus.jsonl"}), IoError);
}

TEST(Corpus, AddRejectsBlankAndDuplicate) {
  Corpus c;
  c.add("a", "text", "s");
  EXPECT_THROW(c.add("a", "other", "s"), ValidationError);
  EXPECT_THROW(c.add("b", "  ", "s"), ValidationError);
  EXPECT_EQ(c.size(), 1u);
}
