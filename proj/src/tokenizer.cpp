#include "litelong/tokenizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>

namespace litelong {
namespace {

bool ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

void append_utf8(std::string& out, UChar32 cp) {
  std::uint8_t buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  U8_APPEND_UNSAFE(buf, len, cp);
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(len));
}

// Calls emit(begin, end, term) once per token.
template <typename Emit>
void scan(std::string_view text, Emit&& emit) {
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  std::string term;
  std::size_t token_begin = 0;
  bool in_token = false;

  while (i < length) {
    const std::int32_t start = i;
    bool alnum = false;
    UChar32 lowered = 0;
    if (s[i] < 0x80) {
      const unsigned char c = s[i++];
      alnum = ascii_alnum(c);
      lowered = (c >= 'A' && c <= 'Z') ? c + ('a' - 'A') : c;
    } else {
      UChar32 cp = 0;
      U8_NEXT(s, i, length, cp);
      if (cp >= 0 && u_isalnum(cp)) {
        alnum = true;
        lowered = u_tolower(cp);
      }
    }

    if (alnum) {
      if (!in_token) {
        in_token = true;
        token_begin = static_cast<std::size_t>(start);
        term.clear();
      }
      if (lowered < 0x80) {
        term.push_back(static_cast<char>(lowered));
      } else {
        append_utf8(term, lowered);
      }
    } else if (in_token) {
      emit(token_begin, static_cast<std::size_t>(start), term);
      in_token = false;
    }
  }
  if (in_token) emit(token_begin, text.size(), term);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  scan(text, [&](std::size_t, std::size_t, const std::string& term) { tokens.push_back(term); });
  return tokens;
}

std::vector<TokenSpan> tokenize_spans(std::string_view text) {
  std::vector<TokenSpan> spans;
  scan(text, [&](std::size_t begin, std::size_t end, const std::string& term) {
    spans.push_back(TokenSpan{begin, end, term});
  });
  return spans;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  scan(text, [&](std::size_t, std::size_t, const std::string&) { ++n; });
  return n;
}

bool is_valid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    if (s[i] < 0x80) {
      ++i;
      continue;
    }
    UChar32 cp = 0;
    U8_NEXT(s, i, length, cp);
    if (cp < 0) return false;
  }
  return true;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace litelong
