#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace litelong {

struct CategoryNode {
  std::string code;
  std::string label;
  std::optional<std::string> parent_code;
  int depth = 0;  // 0 for primary categories
};

/// Hierarchical subject classification. Leaves ("subcategories") are the
/// unit the topic debate iterates over; interior nodes only contribute
/// context to prompts.
class Taxonomy {
 public:
  Taxonomy() = default;
  /// Validates parent links, rejects cycles, computes depths and leaves.
  explicit Taxonomy(std::map<std::string, CategoryNode> nodes);

  const std::map<std::string, CategoryNode>& nodes() const { return nodes_; }
  /// Leaf codes in lexicographic order.
  const std::vector<std::string>& subcategories() const { return subcategories_; }

  const CategoryNode& node(std::string_view code) const;
  bool contains(std::string_view code) const;
  bool is_leaf(std::string_view code) const;

  /// "Root > Mid > Leaf" label path for prompt context.
  std::string path_label(std::string_view code) const;

  /// Canonical text form (one node per line, code order). Identical inputs
  /// give identical bytes.
  std::string serialize() const;

 private:
  std::map<std::string, CategoryNode> nodes_;
  std::vector<std::string> subcategories_;
};

/// Reads CSV with header code,label,parent_code (RFC 4180 quoting).
Taxonomy load_taxonomy(const std::filesystem::path& path);
Taxonomy parse_taxonomy(std::istream& in, const std::string& name = "<taxonomy>");

std::size_t subcategory_count(const Taxonomy& taxonomy);

}  // namespace litelong
