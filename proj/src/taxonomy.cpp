#include "litelong/taxonomy.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "litelong/error.hpp"

namespace litelong {
namespace {

struct CsvRecord {
  std::size_t line = 0;  // line on which the record starts
  std::vector<std::string> fields;
};

// Minimal RFC 4180 reader: quoted fields may contain commas, doubled
// quotes and line breaks.
bool read_record(std::istream& in, std::size_t& line, CsvRecord& rec) {
  rec.fields.clear();
  rec.line = line + 1;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c = 0;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      if (!field.empty() && field.back() == '\r') field.pop_back();
      rec.fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted field starting on line " + std::to_string(rec.line));
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  rec.fields.push_back(std::move(field));
  ++line;
  return true;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Taxonomy::Taxonomy(std::map<std::string, CategoryNode> nodes) : nodes_(std::move(nodes)) {
  std::set<std::string> has_children;
  for (const auto& [code, node] : nodes_) {
    if (!node.parent_code) continue;
    if (!nodes_.count(*node.parent_code)) {
      throw ValidationError("category " + code + " names unknown parent_code " + *node.parent_code);
    }
    has_children.insert(*node.parent_code);
  }

  // Depth by walking parent links; a walk that revisits a code is a cycle.
  std::map<std::string, int> depth;
  for (const auto& [code, node] : nodes_) {
    if (depth.count(code)) continue;
    std::vector<std::string> chain;
    std::set<std::string> on_chain;
    std::string cur = code;
    int base = -1;
    for (;;) {
      if (const auto it = depth.find(cur); it != depth.end()) {
        base = it->second;
        break;
      }
      if (!on_chain.insert(cur).second) {
        throw ValidationError("cycle in taxonomy through category " + cur);
      }
      chain.push_back(cur);
      const auto& n = nodes_.at(cur);
      if (!n.parent_code) break;
      cur = *n.parent_code;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[*it] = ++base;
  }
  for (auto& [code, node] : nodes_) {
    node.depth = depth.at(code);
    if (!has_children.count(code)) subcategories_.push_back(code);
  }
}

const CategoryNode& Taxonomy::node(std::string_view code) const {
  const auto it = nodes_.find(std::string(code));
  if (it == nodes_.end()) throw NotFoundError("unknown category code " + std::string(code));
  return it->second;
}

bool Taxonomy::contains(std::string_view code) const { return nodes_.count(std::string(code)) > 0; }

bool Taxonomy::is_leaf(std::string_view code) const {
  return std::binary_search(subcategories_.begin(), subcategories_.end(), std::string(code));
}

std::string Taxonomy::path_label(std::string_view code) const {
  std::vector<const CategoryNode*> chain;
  for (const CategoryNode* n = &node(code);;) {
    chain.push_back(n);
    if (!n->parent_code) break;
    n = &node(*n->parent_code);
  }
  std::string out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (!out.empty()) out += " > ";
    out += (*it)->label;
  }
  return out;
}

std::string Taxonomy::serialize() const {
  std::ostringstream out;
  for (const auto& [code, n] : nodes_) {
    out << code << '\t' << n.label << '\t' << n.parent_code.value_or("") << '\t' << n.depth
        << '\t' << (is_leaf(code) ? "leaf" : "interior") << '\n';
  }
  return out.str();
}

Taxonomy parse_taxonomy(std::istream& in, const std::string& name) {
  std::size_t line = 0;
  CsvRecord rec;
  if (!read_record(in, line, rec)) throw ParseError(name + ": missing header row");
  if (!rec.fields.empty() && rec.fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    rec.fields[0].erase(0, 3);
  }
  if (rec.fields.size() != 3 || trim(rec.fields[0]) != "code" || trim(rec.fields[1]) != "label" ||
      trim(rec.fields[2]) != "parent_code") {
    throw ParseError(name + ": header must be code,label,parent_code");
  }

  std::map<std::string, CategoryNode> nodes;
  std::map<std::string, std::size_t> row_of;
  while (read_record(in, line, rec)) {
    if (rec.fields.size() == 1 && trim(rec.fields[0]).empty()) continue;
    const std::string at = name + ":" + std::to_string(rec.line);
    if (rec.fields.size() != 3) {
      throw ParseError(at + ": expected 3 fields, found " + std::to_string(rec.fields.size()));
    }
    CategoryNode node;
    node.code = trim(rec.fields[0]);
    node.label = trim(rec.fields[1]);
    if (auto parent = trim(rec.fields[2]); !parent.empty()) node.parent_code = std::move(parent);
    if (node.code.empty()) throw ValidationError(at + ": empty code");
    if (const auto prev = row_of.find(node.code); prev != row_of.end()) {
      throw ValidationError(at + ": duplicate code " + node.code + " (first on line " +
                            std::to_string(prev->second) + ")");
    }
    row_of[node.code] = rec.line;
    nodes.emplace(node.code, std::move(node));
  }

  for (const auto& [code, node] : nodes) {
    if (node.parent_code && !nodes.count(*node.parent_code)) {
      throw ValidationError(name + ":" + std::to_string(row_of[code]) + ": category " + code +
                            " names unknown parent_code " + *node.parent_code);
    }
  }
  return Taxonomy(std::move(nodes));
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open taxonomy " + path.string());
  return parse_taxonomy(in, path.string());
}

std::size_t subcategory_count(const Taxonomy& taxonomy) { return taxonomy.subcategories().size(); }

}  // namespace litelong
