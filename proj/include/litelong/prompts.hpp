#pragma once

#include <map>
#include <string>
#include <string_view>

namespace litelong {

/// Body of a prompt asset (the metadata header above the "---" line is
/// stripped). Throws NotFoundError for an unknown name.
const std::string& prompt_template(std::string_view name);

/// Substitutes {{key}} placeholders. Unknown placeholders are left intact.
std::string render_prompt(std::string_view name, const std::map<std::string, std::string>& vars);

/// Wraps structured round data so a model (or the mock) can read it back.
std::string round_context_block(const std::string& json_text);

/// Extracts the JSON text of a round-context block, if present.
bool extract_round_context(std::string_view prompt, std::string& json_text);

}  // namespace litelong
