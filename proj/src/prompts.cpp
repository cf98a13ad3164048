#include "litelong/prompts.hpp"

#include "litelong/error.hpp"

namespace litelong {
namespace detail {
const std::map<std::string, std::string>& prompt_assets();
}

namespace {

constexpr std::string_view kOpen = "<round_context>\n";
constexpr std::string_view kClose = "\n</round_context>";

std::string strip_header(const std::string& raw) {
  const auto sep = raw.find("\n---\n");
  std::string body = sep == std::string::npos ? raw : raw.substr(sep + 5);
  while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
  return body;
}

}  // namespace

const std::string& prompt_template(std::string_view name) {
  static const std::map<std::string, std::string> bodies = [] {
    std::map<std::string, std::string> out;
    for (const auto& [file, raw] : detail::prompt_assets()) {
      // "generate.v1.txt" -> "generate"
      out.emplace(file.substr(0, file.find('.')), strip_header(raw));
    }
    return out;
  }();
  const auto it = bodies.find(std::string(name));
  if (it == bodies.end()) throw NotFoundError("unknown prompt template " + std::string(name));
  return it->second;
}

std::string render_prompt(std::string_view name, const std::map<std::string, std::string>& vars) {
  std::string out = prompt_template(name);
  for (const auto& [key, value] : vars) {
    const std::string needle = "{{" + key + "}}";
    for (auto pos = out.find(needle); pos != std::string::npos; pos = out.find(needle, pos + value.size())) {
      out.replace(pos, needle.size(), value);
    }
  }
  return out;
}

std::string round_context_block(const std::string& json_text) {
  return std::string(kOpen) + json_text + std::string(kClose);
}

bool extract_round_context(std::string_view prompt, std::string& json_text) {
  const auto open = prompt.rfind(kOpen);
  if (open == std::string_view::npos) return false;
  const auto begin = open + kOpen.size();
  const auto close = prompt.find(kClose, begin);
  if (close == std::string_view::npos) return false;
  json_text.assign(prompt.substr(begin, close - begin));
  return true;
}

}  // namespace litelong
