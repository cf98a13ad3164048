#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/corpus.hpp"
#include "litelong/inverted_index.hpp"

namespace litelong {

enum class SegmentRole { document, meta_chunk, hard_negative };
enum class AssemblyStrategy { shuffle_concat, nextlong };

std::string_view to_string(SegmentRole role);
SegmentRole segment_role_from_string(std::string_view s);
std::string_view to_string(AssemblyStrategy s);
AssemblyStrategy assembly_strategy_from_string(std::string_view s);

/// Token range [start_token, end_token) of one corpus document.
struct Segment {
  std::string doc_id;
  std::size_t start_token = 0;
  std::size_t end_token = 0;
  SegmentRole role = SegmentRole::document;

  std::size_t length() const { return end_token - start_token; }
  bool operator==(const Segment&) const = default;
};

struct LongSample {
  std::string sample_id;
  std::string topic_id;
  std::vector<Segment> segments;
  std::size_t token_count = 0;
  AssemblyStrategy strategy = AssemblyStrategy::shuffle_concat;
  std::uint64_t seed = 0;
};

struct ShuffleResult {
  std::vector<LongSample> samples;
  std::size_t dropped_short = 0;
  std::vector<std::string> warnings;
};

/// Shuffles the hits (seeded Fisher-Yates over rank order) and packs them
/// greedily into consecutive samples of exactly target_tokens. The document
/// that overflows a sample contributes its head and the rest is discarded.
/// A trailing short sample is kept only when allow_short is set.
ShuffleResult assemble_shuffle(const RetrievalResult& result, const Corpus& corpus, std::size_t target_tokens,
                               std::uint64_t seed, bool allow_short = false);

/// A candidate hard negative: a chunk of a retrieved document.
struct Chunk {
  std::string doc_id;
  std::size_t start_token = 0;
  std::size_t end_token = 0;
  std::vector<std::string> terms;

  std::size_t length() const { return end_token - start_token; }
};

/// Similarity between a query and the chunks of a negative pool. The
/// default is BM25; a dense backend can replace it behind this interface.
class ChunkSimilarity {
 public:
  virtual ~ChunkSimilarity() = default;
  /// Called once per sample with the full candidate pool.
  virtual void prepare(const std::vector<Chunk>& pool) = 0;
  virtual double score(const std::vector<std::string>& query_terms, std::size_t chunk) const = 0;
};

/// BM25 with corpus-level idf from the index and length normalisation
/// against the mean chunk length of the pool.
class Bm25ChunkSimilarity : public ChunkSimilarity {
 public:
  explicit Bm25ChunkSimilarity(const InvertedIndex& index) : index_(index) {}
  void prepare(const std::vector<Chunk>& pool) override;
  double score(const std::vector<std::string>& query_terms, std::size_t chunk) const override;

 private:
  const InvertedIndex& index_;
  double avg_length_ = 0.0;
  std::vector<std::unordered_map<std::string, std::uint32_t>> tf_;
  std::vector<std::size_t> lengths_;
};

struct NextLongOptions {
  std::size_t target_tokens = 128000;
  std::size_t meta_chunk_tokens = 2048;
  std::size_t negatives_per_chunk = 3;
  std::size_t query_tokens = 64;  // leading meta-chunk tokens used as the mining query
};

struct NextLongResult {
  LongSample sample;
  std::vector<std::string> warnings;
  bool complete = false;  // token_count == target_tokens
};

/// Builds one sample from a seeded pick of a source document:
/// the source is cut into meta-chunks, and each meta-chunk is preceded by
/// its negatives_per_chunk most similar chunks cut from the other retrieved
/// documents (each chunk used at most once). The final segment is truncated
/// at target_tokens; when meta-chunks run out first, extra negatives ranked
/// against the last meta-chunk fill the remainder.
NextLongResult assemble_nextlong(const RetrievalResult& result, const Corpus& corpus, const InvertedIndex& index,
                                 const NextLongOptions& options, std::uint64_t seed,
                                 ChunkSimilarity* similarity = nullptr);

/// Splits [0, length) into consecutive ranges of chunk_tokens (last may be shorter).
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t length, std::size_t chunk_tokens);

/// Sample text: each segment's source bytes from its first to its last
/// token, joined by `joiner`. Re-tokenising it gives token_count tokens.
std::string materialize_text(const LongSample& sample, const Corpus& corpus, std::string_view joiner = "\n");

nlohmann::json sample_to_json(const LongSample& sample, const std::string& text);

struct SamplesManifest {
  std::size_t samples = 0;
  std::size_t total_tokens = 0;
  std::size_t target_tokens = 0;
  AssemblyStrategy strategy = AssemblyStrategy::shuffle_concat;
  std::string config_hash;
  std::size_t dropped_short = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

/// Writes samples.jsonl (via a temporary file, removed on failure) and
/// returns the manifest; the caller fills config_hash/dropped_short/warnings
/// beforehand through `base`.
SamplesManifest write_samples(const std::vector<LongSample>& samples, const Corpus& corpus,
                              const std::filesystem::path& path, SamplesManifest base,
                              std::string_view joiner = "\n");

}  // namespace litelong
