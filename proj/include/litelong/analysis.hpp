#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/corpus.hpp"
#include "litelong/topic.hpp"

namespace litelong {

enum class DepthMode {
  min_path,   // shortest distance from any root
  mean_path,  // mean length over all root-to-term paths
};

std::string_view to_string(DepthMode mode);
DepthMode depth_mode_from_string(std::string_view s);

inline constexpr double kAbstractBelowDepth = 3.0;
inline constexpr double kSpecificAboveDepth = 9.0;

/// Hypernym DAG (child -> parents), e.g. exported from WordNet. Terms are
/// normalised with the pipeline tokenizer so they match topic tokens.
class HypernymGraph {
 public:
  /// Validates acyclicity and precomputes depths.
  explicit HypernymGraph(const std::vector<std::pair<std::string, std::string>>& child_parent_edges);

  bool contains(std::string_view term) const { return min_depth_.count(std::string(term)) > 0; }
  const std::set<std::string>& roots() const { return roots_; }
  const std::map<std::string, std::vector<std::string>>& parents() const { return parents_; }
  std::size_t size() const { return min_depth_.size(); }

  std::optional<int> min_depth(std::string_view term) const;
  std::optional<double> mean_depth(std::string_view term) const;
  std::optional<double> depth(std::string_view term, DepthMode mode) const;

  /// Longest root-to-term path length in the graph.
  int longest_path() const { return longest_; }

 private:
  std::map<std::string, std::vector<std::string>> parents_;
  std::set<std::string> roots_;
  std::map<std::string, int> min_depth_;
  std::map<std::string, double> mean_depth_;
  int longest_ = 0;
};

/// Reads child<TAB>parent lines; blank lines and lines starting with '#'
/// are ignored.
HypernymGraph load_hypernyms(const std::filesystem::path& path);
HypernymGraph parse_hypernyms(std::istream& in, const std::string& name = "<hypernyms>");

/// Minimum edge count from any root; nullopt for a term not in the graph.
std::optional<int> term_depth(const HypernymGraph& graph, std::string_view term);

struct AbstractionReport {
  std::map<std::string, double> per_topic_depth;
  std::size_t classified_topics = 0;
  std::size_t abstract_topics = 0;  // depth < 3
  std::size_t specific_topics = 0;  // depth > 9
  double share_abstract = 0.0;
  double share_specific = 0.0;
  std::size_t unknown_terms = 0;   // topic tokens absent from the graph
  std::size_t unknown_topics = 0;  // topics with no token in the graph
  DepthMode mode = DepthMode::min_path;

  nlohmann::json to_json() const;
};

/// Per-topic mean depth over the topic's in-graph tokens. Topics with no
/// in-graph token count as unknown and are left out of both shares.
AbstractionReport classify_topics(const HypernymGraph& graph, const std::vector<Topic>& topics,
                                  DepthMode mode = DepthMode::min_path);

struct SampleStats {
  std::size_t samples = 0;
  std::size_t total_tokens = 0;
  std::map<std::size_t, std::size_t> token_count_histogram;
  std::map<std::size_t, std::size_t> docs_per_sample_histogram;
  std::map<std::string, std::size_t> role_segments;
  std::map<std::string, std::size_t> role_tokens;
  std::map<std::string, std::size_t> source_tokens;  // needs a corpus
  std::map<std::string, std::size_t> strategy_samples;

  nlohmann::json to_json() const;
};

/// Reads samples.jsonl. With a corpus, segment tokens are also attributed
/// to document sources.
SampleStats sample_stats(const std::filesystem::path& samples_path, const Corpus* corpus = nullptr);

}  // namespace litelong
