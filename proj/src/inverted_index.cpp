#include "litelong/inverted_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "litelong/error.hpp"
#include "litelong/parallel.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {
namespace {

constexpr char kMagic[] = {'L', 'L', 'I', 'D', 'X', '1'};

inline double term_score(double idf, std::uint32_t tf, double length_norm, double k1) {
  const double f = static_cast<double>(tf);
  return idf * (f * (k1 + 1.0)) / (f + length_norm);
}

struct Partition {
  std::vector<std::string> terms;
  std::vector<std::vector<Posting>> lists;
};

Partition index_partition(const Corpus& corpus, std::size_t begin, std::size_t end) {
  Partition part;
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<std::uint32_t> doc_terms;
  for (std::size_t ord = begin; ord < end; ++ord) {
    doc_terms.clear();
    for (auto& tok : tokenize(corpus.at(ord).text)) {
      auto [it, inserted] = ids.try_emplace(std::move(tok), static_cast<std::uint32_t>(part.terms.size()));
      if (inserted) {
        part.terms.push_back(it->first);
        part.lists.emplace_back();
      }
      doc_terms.push_back(it->second);
    }
    std::sort(doc_terms.begin(), doc_terms.end());
    for (std::size_t i = 0; i < doc_terms.size();) {
      std::size_t j = i;
      while (j < doc_terms.size() && doc_terms[j] == doc_terms[i]) ++j;
      part.lists[doc_terms[i]].push_back(
          Posting{static_cast<std::uint32_t>(ord), static_cast<std::uint32_t>(j - i)});
      i = j;
    }
  }
  return part;
}

// --- snapshot encoding -----------------------------------------------------

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(static_cast<std::make_unsigned_t<T>>(value) >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void put_varint(std::ostream& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.put(static_cast<char>((v & 0x7F) | 0x80));
    v >>= 7;
  }
  out.put(static_cast<char>(v));
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw IoError("string too long for snapshot");
  put_le(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T le() {
    unsigned char buf[sizeof(T)];
    bytes(reinterpret_cast<char*>(buf), sizeof(T));
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
    }
    return static_cast<T>(v);
  }

  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) fail("truncated varint");
      v |= static_cast<std::uint64_t>(c & 0x7F) << shift;
      if (!(c & 0x80)) return v;
    }
    fail("varint too long");
  }

  std::string string() {
    const auto len = le<std::uint32_t>();
    std::string s(len, '\0');
    bytes(s.data(), len);
    return s;
  }

  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("unexpected end of file");
  }

  bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

  [[noreturn]] static void fail(const std::string& what) {
    throw ParseError("corrupt index snapshot: " + what);
  }

 private:
  std::istream& in_;
};

}  // namespace

void InvertedIndex::finalize() {
  const std::uint64_t total = std::accumulate(doc_lengths_.begin(), doc_lengths_.end(), std::uint64_t{0});
  avgdl_ = static_cast<double>(total) / static_cast<double>(doc_lengths_.size());
  term_ids_.clear();
  term_ids_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) term_ids_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  length_norm_.resize(doc_lengths_.size());
  for (std::size_t d = 0; d < doc_lengths_.size(); ++d) {
    // A corpus of token-less documents has avgdl 0; treat every length as average.
    const double ratio = avgdl_ > 0.0 ? static_cast<double>(doc_lengths_[d]) / avgdl_ : 1.0;
    length_norm_[d] = params_.k1 * (1.0 - params_.b + params_.b * ratio);
  }
}

const PostingList* InvertedIndex::postings(std::string_view term) const {
  const auto it = term_ids_.find(std::string(term));
  return it == term_ids_.end() ? nullptr : &lists_[it->second];
}

std::size_t InvertedIndex::doc_frequency(std::string_view term) const {
  const auto* pl = postings(term);
  return pl ? pl->entries.size() : 0;
}

std::size_t InvertedIndex::total_postings() const {
  std::size_t n = 0;
  for (const auto& pl : lists_) n += pl.entries.size();
  return n;
}

double InvertedIndex::idf(std::size_t doc_frequency) const {
  const double n = static_cast<double>(n_docs());
  const double nq = static_cast<double>(doc_frequency);
  return std::log((n - nq + 0.5) / (nq + 0.5) + 1.0);
}

std::vector<std::string> InvertedIndex::distinct_terms(std::span<const std::string> query_terms) {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto& t : query_terms) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

double InvertedIndex::score(std::span<const std::string> query_terms, std::uint32_t doc_ordinal) const {
  if (doc_ordinal >= n_docs()) throw NotFoundError("doc ordinal out of range");
  double total = 0.0;
  for (const auto& term : distinct_terms(query_terms)) {
    const auto* pl = postings(term);
    if (!pl) continue;
    const auto it = std::lower_bound(pl->entries.begin(), pl->entries.end(), doc_ordinal,
                                     [](const Posting& p, std::uint32_t d) { return p.doc_ordinal < d; });
    if (it == pl->entries.end() || it->doc_ordinal != doc_ordinal) continue;
    total += term_score(idf(pl->entries.size()), it->term_frequency, length_norm_[doc_ordinal], params_.k1);
  }
  return total;
}

std::vector<Hit> InvertedIndex::search(std::span<const std::string> query_terms, std::size_t k) const {
  std::vector<double> acc(n_docs(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& term : distinct_terms(query_terms)) {
    const auto* pl = postings(term);
    if (!pl) continue;
    const double w = idf(pl->entries.size());
    for (const auto& p : pl->entries) {
      if (acc[p.doc_ordinal] == 0.0) touched.push_back(p.doc_ordinal);
      acc[p.doc_ordinal] += term_score(w, p.term_frequency, length_norm_[p.doc_ordinal], params_.k1);
    }
  }

  const auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (acc[a] != acc[b]) return acc[a] > acc[b];
    return doc_ids_[a] < doc_ids_[b];
  };
  touched.erase(std::remove_if(touched.begin(), touched.end(), [&](std::uint32_t d) { return !(acc[d] > 0.0); }),
                touched.end());
  const std::size_t keep = std::min(k, touched.size());
  std::partial_sort(touched.begin(), touched.begin() + static_cast<std::ptrdiff_t>(keep), touched.end(), better);

  std::vector<Hit> hits;
  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back(Hit{doc_ids_[touched[i]], acc[touched[i]]});
  return hits;
}

void InvertedIndex::write(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put_le(out, static_cast<std::uint64_t>(n_docs()));
  put_f64(out, avgdl_);
  put_f64(out, params_.k1);
  put_f64(out, params_.b);
  for (auto len : doc_lengths_) put_le(out, len);
  for (const auto& id : doc_ids_) put_string(out, id);
  put_le(out, static_cast<std::uint64_t>(terms_.size()));
  for (const auto& t : terms_) put_string(out, t);
  for (const auto& pl : lists_) {
    put_varint(out, pl.entries.size());
    std::uint32_t prev = 0;
    for (const auto& p : pl.entries) {
      put_varint(out, p.doc_ordinal - prev);
      put_varint(out, p.term_frequency);
      prev = p.doc_ordinal;
    }
  }
}

void InvertedIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write index snapshot " + path.string());
  write(out);
  out.flush();
  if (!out) throw IoError("failed writing index snapshot " + path.string());
}

InvertedIndex InvertedIndex::read(std::istream& in) {
  Reader r(in);
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) Reader::fail("bad magic");

  InvertedIndex idx;
  const auto n_docs = r.le<std::uint64_t>();
  if (n_docs == 0) Reader::fail("zero documents");
  const double stored_avgdl = r.f64();
  idx.params_.k1 = r.f64();
  idx.params_.b = r.f64();
  idx.doc_lengths_.resize(n_docs);
  for (auto& len : idx.doc_lengths_) len = r.le<std::uint32_t>();
  idx.doc_ids_.resize(n_docs);
  for (auto& id : idx.doc_ids_) id = r.string();

  const auto n_terms = r.le<std::uint64_t>();
  idx.terms_.resize(n_terms);
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    idx.terms_[i] = r.string();
    if (i > 0 && !(idx.terms_[i - 1] < idx.terms_[i])) Reader::fail("term dictionary not sorted");
  }
  idx.lists_.resize(n_terms);
  for (std::uint64_t t = 0; t < n_terms; ++t) {
    auto& pl = idx.lists_[t];
    pl.term = idx.terms_[t];
    const auto count = r.varint();
    if (count == 0 || count > n_docs) Reader::fail("bad posting count");
    pl.entries.resize(count);
    std::uint64_t ord = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto delta = r.varint();
      if (i > 0 && delta == 0) Reader::fail("postings not strictly ascending");
      ord += delta;
      const auto tf = r.varint();
      if (ord >= n_docs || tf == 0 || tf > std::numeric_limits<std::uint32_t>::max()) {
        Reader::fail("bad posting entry");
      }
      pl.entries[i] = Posting{static_cast<std::uint32_t>(ord), static_cast<std::uint32_t>(tf)};
    }
  }
  if (!r.at_eof()) Reader::fail("trailing bytes");
  idx.finalize();
  if (std::bit_cast<std::uint64_t>(idx.avgdl_) != std::bit_cast<std::uint64_t>(stored_avgdl)) {
    Reader::fail("avgdl does not match document lengths");
  }
  return idx;
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index snapshot " + path.string());
  return read(in);
}

InvertedIndex build_index(const Corpus& corpus, Bm25Params params, unsigned workers) {
  if (corpus.empty()) throw ValidationError("cannot build an index over an empty corpus");
  if (!(params.k1 > 0.0)) throw ValidationError("BM25 k1 must be > 0");
  if (!(params.b >= 0.0 && params.b <= 1.0)) throw ValidationError("BM25 b must be in [0, 1]");

  const std::size_t n = corpus.size();
  const std::size_t parts = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, n / 1024));
  std::vector<Partition> partitions(parts);
  parallel_for(parts, workers, [&](std::size_t p) {
    partitions[p] = index_partition(corpus, n * p / parts, n * (p + 1) / parts);
  });

  std::unordered_map<std::string, std::uint32_t> global;
  std::vector<std::string> terms;
  std::vector<std::vector<Posting>> lists;
  for (auto& part : partitions) {
    for (std::size_t l = 0; l < part.terms.size(); ++l) {
      auto [it, inserted] = global.try_emplace(part.terms[l], static_cast<std::uint32_t>(terms.size()));
      if (inserted) {
        terms.push_back(part.terms[l]);
        lists.emplace_back();
      }
      auto& dst = lists[it->second];
      dst.insert(dst.end(), part.lists[l].begin(), part.lists[l].end());
    }
    part = Partition{};
  }

  std::vector<std::uint32_t> order(terms.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return terms[a] < terms[b]; });

  InvertedIndex idx;
  idx.params_ = params;
  idx.terms_.reserve(terms.size());
  idx.lists_.reserve(terms.size());
  for (auto id : order) {
    idx.terms_.push_back(terms[id]);
    idx.lists_.push_back(PostingList{terms[id], std::move(lists[id])});
  }
  idx.doc_lengths_.reserve(n);
  idx.doc_ids_.reserve(n);
  for (const auto& doc : corpus.documents()) {
    if (doc.token_count > std::numeric_limits<std::uint32_t>::max()) {
      throw ValidationError("document " + doc.doc_id + " too long to index");
    }
    idx.doc_lengths_.push_back(static_cast<std::uint32_t>(doc.token_count));
    idx.doc_ids_.push_back(doc.doc_id);
  }
  idx.finalize();
  return idx;
}

double bm25_score(const InvertedIndex& index, std::span<const std::string> query_terms,
                  std::uint32_t doc_ordinal) {
  return index.score(query_terms, doc_ordinal);
}

RetrievalResult retrieve(const InvertedIndex& index, const Topic& topic, std::size_t k) {
  if (k == 0) throw ValidationError("retrieval k must be >= 1");
  const auto terms = tokenize(topic.text);
  if (terms.empty()) {
    throw ValidationError("topic " + topic.topic_id + " has no indexable tokens");
  }
  return RetrievalResult{topic.topic_id, index.search(terms, k)};
}

}  // namespace litelong
