#include "litelong/assembly.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "litelong/error.hpp"
#include "litelong/random.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {

using json = nlohmann::json;

std::string_view to_string(SegmentRole role) {
  switch (role) {
    case SegmentRole::document: return "document";
    case SegmentRole::meta_chunk: return "meta_chunk";
    case SegmentRole::hard_negative: return "hard_negative";
  }
  return "document";
}

SegmentRole segment_role_from_string(std::string_view s) {
  if (s == "document") return SegmentRole::document;
  if (s == "meta_chunk") return SegmentRole::meta_chunk;
  if (s == "hard_negative") return SegmentRole::hard_negative;
  throw ParseError("unknown segment role " + std::string(s));
}

std::string_view to_string(AssemblyStrategy s) {
  return s == AssemblyStrategy::shuffle_concat ? "shuffle_concat" : "nextlong";
}

AssemblyStrategy assembly_strategy_from_string(std::string_view s) {
  if (s == "shuffle_concat") return AssemblyStrategy::shuffle_concat;
  if (s == "nextlong") return AssemblyStrategy::nextlong;
  throw ValidationError("unknown assembly strategy " + std::string(s));
}

namespace {

std::string sample_id(const std::string& topic_id, char tag, std::size_t index) {
  std::string num = std::to_string(index);
  if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
  return topic_id + "-" + tag + num;
}

// Appends segments up to a fixed capacity, truncating the one that overflows.
class SampleBuilder {
 public:
  SampleBuilder(LongSample& sample, std::size_t capacity) : sample_(sample), capacity_(capacity) {}

  bool full() const { return sample_.token_count >= capacity_; }

  /// Returns the number of tokens actually appended.
  std::size_t append(Segment seg) {
    if (full() || seg.length() == 0) return 0;
    const std::size_t room = capacity_ - sample_.token_count;
    if (seg.length() > room) seg.end_token = seg.start_token + room;
    sample_.token_count += seg.length();
    const std::size_t added = seg.length();
    sample_.segments.push_back(std::move(seg));
    return added;
  }

 private:
  LongSample& sample_;
  std::size_t capacity_;
};

std::vector<std::string> span_terms(const std::vector<TokenSpan>& spans, std::size_t begin, std::size_t end) {
  std::vector<std::string> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(spans[i].term);
  return out;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t length, std::size_t chunk_tokens) {
  if (chunk_tokens == 0) throw ValidationError("chunk size must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t start = 0; start < length; start += chunk_tokens) {
    out.emplace_back(start, std::min(length, start + chunk_tokens));
  }
  return out;
}

ShuffleResult assemble_shuffle(const RetrievalResult& result, const Corpus& corpus, std::size_t target_tokens,
                               std::uint64_t seed, bool allow_short) {
  if (target_tokens == 0) throw ValidationError("target_tokens must be >= 1");
  ShuffleResult out;
  if (result.hits.empty()) {
    out.warnings.push_back("topic " + result.topic_id + ": empty retrieval result, no samples");
    return out;
  }

  std::vector<std::size_t> order(result.hits.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  LongSample current;
  auto start_sample = [&] {
    current = LongSample{};
    current.topic_id = result.topic_id;
    current.strategy = AssemblyStrategy::shuffle_concat;
    current.seed = seed;
    current.sample_id = sample_id(result.topic_id, 's', out.samples.size());
  };
  start_sample();
  for (std::size_t rank : order) {
    const Document& doc = corpus.get(result.hits[rank].doc_id);
    if (doc.token_count == 0) continue;
    SampleBuilder builder(current, target_tokens);
    builder.append(Segment{doc.doc_id, 0, doc.token_count, SegmentRole::document});
    if (builder.full()) {
      out.samples.push_back(std::move(current));
      start_sample();
    }
  }
  if (current.token_count > 0) {
    if (allow_short) {
      out.samples.push_back(std::move(current));
    } else {
      ++out.dropped_short;
    }
  }
  return out;
}

void Bm25ChunkSimilarity::prepare(const std::vector<Chunk>& pool) {
  tf_.assign(pool.size(), {});
  lengths_.resize(pool.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (const auto& t : pool[i].terms) ++tf_[i][t];
    lengths_[i] = pool[i].length();
    total += lengths_[i];
  }
  avg_length_ = pool.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(pool.size());
}

double Bm25ChunkSimilarity::score(const std::vector<std::string>& query_terms, std::size_t chunk) const {
  const double k1 = index_.k1();
  const double b = index_.b();
  const double ratio = avg_length_ > 0.0 ? static_cast<double>(lengths_[chunk]) / avg_length_ : 1.0;
  const double norm = k1 * (1.0 - b + b * ratio);
  double total = 0.0;
  for (const auto& term : InvertedIndex::distinct_terms(query_terms)) {
    const auto it = tf_[chunk].find(term);
    if (it == tf_[chunk].end()) continue;
    const double f = static_cast<double>(it->second);
    total += index_.idf(index_.doc_frequency(term)) * (f * (k1 + 1.0)) / (f + norm);
  }
  return total;
}

NextLongResult assemble_nextlong(const RetrievalResult& result, const Corpus& corpus, const InvertedIndex& index,
                                 const NextLongOptions& options, std::uint64_t seed, ChunkSimilarity* similarity) {
  if (result.hits.empty()) throw ValidationError("nextlong assembly needs a non-empty retrieval result");
  if (options.meta_chunk_tokens == 0) throw ValidationError("meta_chunk_tokens must be >= 1");
  if (options.target_tokens == 0) throw ValidationError("target_tokens must be >= 1");

  NextLongResult out;
  LongSample& sample = out.sample;
  sample.topic_id = result.topic_id;
  sample.strategy = AssemblyStrategy::nextlong;
  sample.seed = seed;
  sample.sample_id = sample_id(result.topic_id, 'n', 0);
  SampleBuilder builder(sample, options.target_tokens);

  Rng rng(seed);
  const Document& source = corpus.get(result.hits[rng.below(result.hits.size())].doc_id);
  const auto source_spans = tokenize_spans(source.text);
  const auto meta_chunks = chunk_ranges(source_spans.size(), options.meta_chunk_tokens);

  auto finish = [&] {
    out.complete = sample.token_count == options.target_tokens;
    return out;
  };

  if (source_spans.size() > options.target_tokens) {
    out.warnings.push_back("topic " + result.topic_id + ": source " + source.doc_id +
                           " exceeds target length; truncated, no negatives");
    for (const auto& [b, e] : meta_chunks) builder.append(Segment{source.doc_id, b, e, SegmentRole::meta_chunk});
    return finish();
  }

  std::vector<Chunk> pool;
  for (const auto& hit : result.hits) {
    if (hit.doc_id == source.doc_id) continue;
    const auto spans = tokenize_spans(corpus.get(hit.doc_id).text);
    for (const auto& [b, e] : chunk_ranges(spans.size(), options.meta_chunk_tokens)) {
      pool.push_back(Chunk{hit.doc_id, b, e, span_terms(spans, b, e)});
    }
  }
  if (pool.empty()) {
    out.warnings.push_back("topic " + result.topic_id + ": no eligible negatives; emitting chunked source only");
    for (const auto& [b, e] : meta_chunks) builder.append(Segment{source.doc_id, b, e, SegmentRole::meta_chunk});
    return finish();
  }

  Bm25ChunkSimilarity default_similarity(index);
  ChunkSimilarity& sim = similarity ? *similarity : default_similarity;
  sim.prepare(pool);
  std::vector<bool> used(pool.size(), false);

  // Unused chunks ranked by score, then doc_id, then position.
  auto rank_available = [&](const std::vector<std::string>& query) {
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!used[i]) ranked.emplace_back(sim.score(query, i), i);
    }
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      if (pool[a.second].doc_id != pool[b.second].doc_id) return pool[a.second].doc_id < pool[b.second].doc_id;
      return pool[a.second].start_token < pool[b.second].start_token;
    });
    return ranked;
  };
  auto query_of = [&](const std::pair<std::size_t, std::size_t>& chunk) {
    return span_terms(source_spans, chunk.first, std::min(chunk.second, chunk.first + options.query_tokens));
  };

  for (const auto& chunk : meta_chunks) {
    if (builder.full()) break;
    const auto ranked = rank_available(query_of(chunk));
    const std::size_t take = std::min(options.negatives_per_chunk, ranked.size());
    for (std::size_t i = 0; i < take; ++i) {
      const Chunk& neg = pool[ranked[i].second];
      used[ranked[i].second] = true;
      builder.append(Segment{neg.doc_id, neg.start_token, neg.end_token, SegmentRole::hard_negative});
    }
    builder.append(Segment{source.doc_id, chunk.first, chunk.second, SegmentRole::meta_chunk});
  }

  if (!builder.full() && !meta_chunks.empty()) {
    const auto ranked = rank_available(query_of(meta_chunks.back()));
    for (const auto& [score, i] : ranked) {
      if (builder.full()) break;
      used[i] = true;
      builder.append(Segment{pool[i].doc_id, pool[i].start_token, pool[i].end_token, SegmentRole::hard_negative});
    }
    if (!builder.full()) {
      out.warnings.push_back("topic " + result.topic_id + ": retrieved material exhausted at " +
                             std::to_string(sample.token_count) + " tokens");
    }
  }
  return finish();
}

std::string materialize_text(const LongSample& sample, const Corpus& corpus, std::string_view joiner) {
  std::string text;
  std::string cached_id;
  std::vector<TokenSpan> spans;
  for (std::size_t i = 0; i < sample.segments.size(); ++i) {
    const auto& seg = sample.segments[i];
    const Document& doc = corpus.get(seg.doc_id);
    if (seg.doc_id != cached_id) {
      spans = tokenize_spans(doc.text);
      cached_id = seg.doc_id;
    }
    if (seg.start_token >= seg.end_token || seg.end_token > spans.size()) {
      throw ConsistencyError("segment [" + std::to_string(seg.start_token) + ", " + std::to_string(seg.end_token) +
                             ") out of range for document " + seg.doc_id);
    }
    if (i) text.append(joiner);
    const std::size_t from = spans[seg.start_token].begin;
    const std::size_t to = spans[seg.end_token - 1].end;
    text.append(doc.text, from, to - from);
  }
  return text;
}

json sample_to_json(const LongSample& sample, const std::string& text) {
  json segments = json::array();
  for (const auto& s : sample.segments) {
    segments.push_back(
        {{"doc_id", s.doc_id}, {"start_token", s.start_token}, {"end_token", s.end_token}, {"role", to_string(s.role)}});
  }
  return json{{"sample_id", sample.sample_id},       {"topic_id", sample.topic_id},
              {"strategy", to_string(sample.strategy)}, {"seed", sample.seed},
              {"token_count", sample.token_count},   {"segments", std::move(segments)},
              {"text", text}};
}

json SamplesManifest::to_json() const {
  return json{{"samples", samples},
              {"total_tokens", total_tokens},
              {"target_tokens", target_tokens},
              {"strategy", litelong::to_string(strategy)},
              {"config_hash", config_hash},
              {"dropped_short", dropped_short},
              {"warnings", warnings}};
}

SamplesManifest write_samples(const std::vector<LongSample>& samples, const Corpus& corpus,
                              const std::filesystem::path& path, SamplesManifest base, std::string_view joiner) {
  if (joiner.empty() || count_tokens(joiner) != 0) {
    throw ValidationError("joiner must be non-empty and contain no letters or digits");
  }
  auto tmp = path;
  tmp += ".tmp";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    base.samples = 0;
    base.total_tokens = 0;
    for (const auto& s : samples) {
      out << sample_to_json(s, materialize_text(s, corpus, joiner)).dump() << '\n';
      if (!out) throw IoError("failed writing " + tmp.string());
      ++base.samples;
      base.total_tokens += s.token_count;
    }
    out.close();
    if (!out) throw IoError("failed closing " + tmp.string());
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
  return base;
}

}  // namespace litelong
