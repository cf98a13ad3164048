#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace litelong {

struct Document {
  std::string doc_id;
  std::string text;
  std::string source;
  std::size_t token_count = 0;
};

struct SourceLocation {
  std::string file;
  std::size_t line = 0;  // 1-based
};

/// One input line that was not registered, with the reason.
struct SkippedLine {
  std::string file;
  std::size_t line = 0;
  std::string reason;
};

struct CorpusStats {
  std::size_t doc_count = 0;
  std::size_t total_tokens = 0;
  double avg_doc_tokens = 0.0;
  std::map<std::string, std::size_t> source_breakdown;
};

/// Immutable-after-ingestion document store. Documents keep the order in
/// which they were registered, and that order is the document ordinal used
/// by the inverted index.
class Corpus {
 public:
  /// Registers a document, computing its token count. Throws ValidationError
  /// on a duplicate id or empty text.
  void add(std::string doc_id, std::string text, std::string source,
           SourceLocation origin = {});

  const Document& get(std::string_view doc_id) const;
  std::optional<std::size_t> ordinal(std::string_view doc_id) const;
  const Document& at(std::size_t ordinal) const { return docs_.at(ordinal); }

  std::span<const Document> documents() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

  CorpusStats stats() const;

  const std::vector<SkippedLine>& skipped() const { return skipped_; }
  void record_skip(SkippedLine skip) { skipped_.push_back(std::move(skip)); }

 private:
  std::vector<Document> docs_;
  std::vector<SourceLocation> origins_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::vector<SkippedLine> skipped_;
  std::size_t total_tokens_ = 0;
};

/// Reads JSONL files of {"id", "text", "source"?}. Files are parsed in
/// parallel (up to `workers` threads); registration is serial in file order
/// then line order, so duplicate detection and ordinals are deterministic.
Corpus ingest_corpus(const std::vector<std::filesystem::path>& paths, unsigned workers = 1);

/// Writes the skip report as JSONL {"file","line","reason"}.
void write_skip_report(const std::vector<SkippedLine>& skipped, const std::filesystem::path& path);

}  // namespace litelong
