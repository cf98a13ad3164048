#include "litelong/corpus.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "litelong/error.hpp"
#include "litelong/parallel.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {
namespace {

using json = nlohmann::json;

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\n\r\f\v") == std::string_view::npos;
}

std::string where(const SourceLocation& loc) {
  return loc.file + ":" + std::to_string(loc.line);
}

struct ParsedLine {
  std::size_t line = 0;
  std::string id;
  std::string text;
  std::string source;
  std::string skip_reason;  // non-empty means the line is skipped
};

std::vector<ParsedLine> parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());

  std::vector<ParsedLine> out;
  std::string raw;
  std::size_t line_no = 0;
  const std::string file = path.string();
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    ParsedLine parsed;
    parsed.line = line_no;
    if (is_blank(raw)) {
      parsed.skip_reason = "blank line";
      out.push_back(std::move(parsed));
      continue;
    }
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(file + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError(file + ":" + std::to_string(line_no) + ": expected a JSON object");
    }
    const auto id = obj.find("id");
    const auto text = obj.find("text");
    if (id == obj.end() || !id->is_string()) {
      throw ParseError(file + ":" + std::to_string(line_no) + ": missing string field \"id\"");
    }
    if (text == obj.end() || !text->is_string()) {
      throw ParseError(file + ":" + std::to_string(line_no) + ": missing string field \"text\"");
    }
    parsed.id = id->get<std::string>();
    parsed.text = text->get<std::string>();
    if (const auto src = obj.find("source"); src != obj.end() && !src->is_null()) {
      if (!src->is_string()) {
        throw ParseError(file + ":" + std::to_string(line_no) + ": field \"source\" must be a string");
      }
      parsed.source = src->get<std::string>();
    }
    if (!is_valid_utf8(parsed.text) || !is_valid_utf8(parsed.id)) {
      throw ParseError(file + ":" + std::to_string(line_no) + ": invalid UTF-8");
    }
    if (is_blank(parsed.text)) parsed.skip_reason = "empty text";
    out.push_back(std::move(parsed));
  }
  return out;
}

}  // namespace

void Corpus::add(std::string doc_id, std::string text, std::string source, SourceLocation origin) {
  if (is_blank(text)) throw ValidationError("document " + doc_id + " has empty text");
  if (const auto it = by_id_.find(doc_id); it != by_id_.end()) {
    throw ValidationError("duplicate doc_id \"" + doc_id + "\" at " + where(origin) +
                          " (first defined at " + where(origins_[it->second]) + ")");
  }
  Document doc;
  doc.token_count = count_tokens(text);
  doc.doc_id = std::move(doc_id);
  doc.text = std::move(text);
  doc.source = source.empty() ? "unknown" : std::move(source);
  total_tokens_ += doc.token_count;
  by_id_.emplace(doc.doc_id, docs_.size());
  docs_.push_back(std::move(doc));
  origins_.push_back(std::move(origin));
}

const Document& Corpus::get(std::string_view doc_id) const {
  const auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) throw NotFoundError("unknown doc_id \"" + std::string(doc_id) + "\"");
  return docs_[it->second];
}

std::optional<std::size_t> Corpus::ordinal(std::string_view doc_id) const {
  const auto it = by_id_.find(std::string(doc_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

CorpusStats Corpus::stats() const {
  CorpusStats s;
  s.doc_count = docs_.size();
  s.total_tokens = total_tokens_;
  s.avg_doc_tokens = docs_.empty() ? 0.0
                                   : static_cast<double>(total_tokens_) /
                                         static_cast<double>(docs_.size());
  for (const auto& d : docs_) ++s.source_breakdown[d.source];
  return s;
}

Corpus ingest_corpus(const std::vector<std::filesystem::path>& paths, unsigned workers) {
  std::vector<std::vector<ParsedLine>> parsed(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) { parsed[i] = parse_file(paths[i]); });

  Corpus corpus;
  for (std::size_t f = 0; f < paths.size(); ++f) {
    const std::string file = paths[f].string();
    for (auto& line : parsed[f]) {
      if (!line.skip_reason.empty()) {
        corpus.record_skip({file, line.line, line.skip_reason});
        continue;
      }
      corpus.add(std::move(line.id), std::move(line.text), std::move(line.source),
                 SourceLocation{file, line.line});
    }
  }
  return corpus;
}

void write_skip_report(const std::vector<SkippedLine>& skipped, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write skip report " + path.string());
  for (const auto& s : skipped) {
    out << json{{"file", s.file}, {"line", s.line}, {"reason", s.reason}}.dump() << '\n';
  }
  if (!out) throw IoError("failed writing skip report " + path.string());
}

}  // namespace litelong
