#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace litelong {

/// Byte range of one token inside the source text, plus its normalized form.
struct TokenSpan {
  std::size_t begin = 0;  // byte offset of the first code point
  std::size_t end = 0;    // byte offset one past the last code point
  std::string term;       // lowercased token
};

/// Pipeline tokenizer. Lowercases and splits on every maximal run of
/// characters that are not Unicode letters or decimal digits. The same
/// tokens drive BM25 terms and every token-length budget.
///
/// Input is assumed to be valid UTF-8; ill-formed sequences are treated as
/// separators (ingestion rejects such text before it gets here).
std::vector<std::string> tokenize(std::string_view text);

std::vector<TokenSpan> tokenize_spans(std::string_view text);

std::size_t count_tokens(std::string_view text);

bool is_valid_utf8(std::string_view text);

/// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace litelong
