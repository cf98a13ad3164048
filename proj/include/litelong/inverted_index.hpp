#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litelong/corpus.hpp"
#include "litelong/topic.hpp"

namespace litelong {

struct Posting {
  std::uint32_t doc_ordinal = 0;
  std::uint32_t term_frequency = 0;
  bool operator==(const Posting&) const = default;
};

struct PostingList {
  std::string term;
  std::vector<Posting> entries;  // strictly ascending doc_ordinal
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Hit {
  std::string doc_id;
  double score = 0.0;
};

struct RetrievalResult {
  std::string topic_id;
  std::vector<Hit> hits;  // score descending, ties by ascending doc_id
};

/// Okapi BM25 over a memory-resident, immutable inverted index.
///
///   score(D, Q) = sum over distinct q in Q of
///       idf(q) * f(q,D) * (k1 + 1) / (f(q,D) + k1 * (1 - b + b * |D| / avgdl))
///   idf(q) = ln((N - n_q + 0.5) / (n_q + 0.5) + 1)
///
/// The +1 inside the log keeps idf positive, so every document sharing a
/// term with the query scores > 0 and nothing else does.
class InvertedIndex {
 public:
  std::size_t n_docs() const { return doc_lengths_.size(); }
  double avgdl() const { return avgdl_; }
  double k1() const { return params_.k1; }
  double b() const { return params_.b; }
  const Bm25Params& params() const { return params_; }

  std::span<const std::uint32_t> doc_lengths() const { return doc_lengths_; }
  const std::string& doc_id(std::uint32_t ordinal) const { return doc_ids_.at(ordinal); }
  std::span<const std::string> doc_ids() const { return doc_ids_; }

  /// Sorted term dictionary.
  std::span<const std::string> terms() const { return terms_; }
  const PostingList* postings(std::string_view term) const;
  std::size_t doc_frequency(std::string_view term) const;
  std::size_t total_postings() const;

  double idf(std::size_t doc_frequency) const;

  /// Distinct query terms in first-occurrence order.
  static std::vector<std::string> distinct_terms(std::span<const std::string> query_terms);

  double score(std::span<const std::string> query_terms, std::uint32_t doc_ordinal) const;

  /// Top-k documents with score > 0.
  std::vector<Hit> search(std::span<const std::string> query_terms, std::size_t k) const;

  /// Snapshot layout (all integers little-endian):
  ///   "LLIDX1" | u64 n_docs | f64 avgdl | f64 k1 | f64 b
  ///   | u32 doc_length x n_docs | (u32 len, bytes) doc_id x n_docs
  ///   | u64 n_terms | (u32 len, bytes) term x n_terms, sorted
  ///   | per term: varint count, then (varint ordinal delta, varint tf) x count
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static InvertedIndex read(std::istream& in);
  static InvertedIndex load(const std::filesystem::path& path);

  friend InvertedIndex build_index(const Corpus& corpus, Bm25Params params, unsigned workers);

 private:
  void finalize();

  Bm25Params params_;
  double avgdl_ = 0.0;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<std::string> doc_ids_;
  std::vector<std::string> terms_;
  std::vector<PostingList> lists_;  // aligned with terms_
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<double> length_norm_;  // k1 * (1 - b + b * |D| / avgdl)
};

/// Builds the index over every document. Documents may be split into
/// contiguous partitions indexed in parallel; partial postings merge in
/// partition order, so the result is independent of `workers`.
InvertedIndex build_index(const Corpus& corpus, Bm25Params params = {}, unsigned workers = 1);

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms,
                  std::uint32_t doc_ordinal);

RetrievalResult retrieve(const InvertedIndex& index, const Topic& topic, std::size_t k = 256);

}  // namespace litelong
