#include "litelong/analysis.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include "litelong/error.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {

using json = nlohmann::json;

std::string_view to_string(DepthMode mode) { return mode == DepthMode::min_path ? "min" : "mean"; }

DepthMode depth_mode_from_string(std::string_view s) {
  if (s == "min") return DepthMode::min_path;
  if (s == "mean") return DepthMode::mean_path;
  throw ValidationError("unknown depth mode " + std::string(s) + " (expected min or mean)");
}

HypernymGraph::HypernymGraph(const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::vector<std::string>> children;
  std::set<std::string> terms;
  for (const auto& [child, parent] : edges) {
    if (child == parent) throw ValidationError("hypernym cycle: " + child + " is its own parent");
    auto& ps = parents_[child];
    if (std::find(ps.begin(), ps.end(), parent) != ps.end()) continue;
    ps.push_back(parent);
    children[parent].push_back(child);
    terms.insert(child);
    terms.insert(parent);
  }
  for (const auto& t : terms) {
    if (!parents_.count(t)) roots_.insert(t);
  }

  // Kahn's algorithm from the roots; anything left unvisited sits on a cycle.
  std::map<std::string, std::size_t> pending;
  for (const auto& [child, ps] : parents_) pending[child] = ps.size();
  std::map<std::string, double> paths, path_len_sum;
  std::deque<std::string> ready(roots_.begin(), roots_.end());
  for (const auto& r : roots_) {
    min_depth_[r] = 0;
    paths[r] = 1.0;
    path_len_sum[r] = 0.0;
  }
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::string term = ready.front();
    ready.pop_front();
    ++visited;
    const auto it = children.find(term);
    if (it == children.end()) continue;
    for (const auto& child : it->second) {
      const int d = min_depth_[term] + 1;
      if (const auto cur = min_depth_.find(child); cur == min_depth_.end() || d < cur->second) min_depth_[child] = d;
      paths[child] += paths[term];
      path_len_sum[child] += path_len_sum[term] + paths[term];
      if (--pending[child] == 0) ready.push_back(child);
    }
  }
  if (visited != terms.size()) {
    for (const auto& [child, n] : pending) {
      if (n > 0) throw ValidationError("hypernym cycle through term " + child);
    }
  }

  // Longest path, in a second pass over the same order.
  std::map<std::string, int> longest;
  for (const auto& r : roots_) longest[r] = 0;
  std::map<std::string, std::size_t> remaining;
  for (const auto& [child, ps] : parents_) remaining[child] = ps.size();
  std::deque<std::string> queue(roots_.begin(), roots_.end());
  while (!queue.empty()) {
    const std::string term = queue.front();
    queue.pop_front();
    longest_ = std::max(longest_, longest[term]);
    const auto it = children.find(term);
    if (it == children.end()) continue;
    for (const auto& child : it->second) {
      longest[child] = std::max(longest[child], longest[term] + 1);
      if (--remaining[child] == 0) queue.push_back(child);
    }
  }

  for (const auto& [term, n] : paths) mean_depth_[term] = path_len_sum[term] / n;
}

std::optional<int> HypernymGraph::min_depth(std::string_view term) const {
  const auto it = min_depth_.find(std::string(term));
  if (it == min_depth_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> HypernymGraph::mean_depth(std::string_view term) const {
  const auto it = mean_depth_.find(std::string(term));
  if (it == mean_depth_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> HypernymGraph::depth(std::string_view term, DepthMode mode) const {
  if (mode == DepthMode::mean_path) return mean_depth(term);
  const auto d = min_depth(term);
  if (!d) return std::nullopt;
  return static_cast<double>(*d);
}

HypernymGraph parse_hypernyms(std::istream& in, const std::string& name) {
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected child<TAB>parent");
    }
    std::string child = join_tokens(tokenize(std::string_view(line).substr(0, tab)));
    std::string parent = join_tokens(tokenize(std::string_view(line).substr(tab + 1)));
    if (child.empty() || parent.empty()) {
      throw ParseError(name + ":" + std::to_string(line_no) + ": empty term");
    }
    edges.emplace_back(std::move(child), std::move(parent));
  }
  return HypernymGraph(edges);
}

HypernymGraph load_hypernyms(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open hypernym file " + path.string());
  return parse_hypernyms(in, path.string());
}

std::optional<int> term_depth(const HypernymGraph& graph, std::string_view term) { return graph.min_depth(term); }

json AbstractionReport::to_json() const {
  return json{{"depth_mode", litelong::to_string(mode)},
              {"per_topic_depth", per_topic_depth},
              {"classified_topics", classified_topics},
              {"abstract_topics", abstract_topics},
              {"specific_topics", specific_topics},
              {"share_abstract", share_abstract},
              {"share_specific", share_specific},
              {"unknown_terms", unknown_terms},
              {"unknown_topics", unknown_topics}};
}

AbstractionReport classify_topics(const HypernymGraph& graph, const std::vector<Topic>& topics, DepthMode mode) {
  AbstractionReport report;
  report.mode = mode;
  for (const auto& topic : topics) {
    double sum = 0.0;
    std::size_t found = 0;
    for (const auto& tok : tokenize(topic.text)) {
      if (const auto d = graph.depth(tok, mode)) {
        sum += *d;
        ++found;
      } else {
        ++report.unknown_terms;
      }
    }
    if (found == 0) {
      ++report.unknown_topics;
      continue;
    }
    const double depth = sum / static_cast<double>(found);
    report.per_topic_depth[topic.topic_id] = depth;
  }
  // Counts come from the id-keyed map so input order cannot matter.
  for (const auto& [id, depth] : report.per_topic_depth) {
    ++report.classified_topics;
    if (depth < kAbstractBelowDepth) ++report.abstract_topics;
    if (depth > kSpecificAboveDepth) ++report.specific_topics;
  }
  if (report.classified_topics > 0) {
    const auto n = static_cast<double>(report.classified_topics);
    report.share_abstract = static_cast<double>(report.abstract_topics) / n;
    report.share_specific = static_cast<double>(report.specific_topics) / n;
  }
  return report;
}

json SampleStats::to_json() const {
  auto keyed = [](const std::map<std::size_t, std::size_t>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[std::to_string(k)] = v;
    return out;
  };
  return json{{"samples", samples},
              {"total_tokens", total_tokens},
              {"token_count_histogram", keyed(token_count_histogram)},
              {"docs_per_sample_histogram", keyed(docs_per_sample_histogram)},
              {"role_segments", role_segments},
              {"role_tokens", role_tokens},
              {"source_tokens", source_tokens},
              {"strategy_samples", strategy_samples}};
}

SampleStats sample_stats(const std::filesystem::path& samples_path, const Corpus* corpus) {
  std::ifstream in(samples_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + samples_path.string());
  SampleStats stats;
  for (const char* role : {"document", "meta_chunk", "hard_negative"}) {
    stats.role_segments[role] = 0;
    stats.role_tokens[role] = 0;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const auto tokens = j.at("token_count").get<std::size_t>();
      ++stats.samples;
      stats.total_tokens += tokens;
      ++stats.token_count_histogram[tokens];
      ++stats.strategy_samples[j.at("strategy").get<std::string>()];
      std::set<std::string> docs;
      for (const auto& seg : j.at("segments")) {
        const auto doc_id = seg.at("doc_id").get<std::string>();
        const auto role = seg.at("role").get<std::string>();
        const auto len = seg.at("end_token").get<std::size_t>() - seg.at("start_token").get<std::size_t>();
        docs.insert(doc_id);
        ++stats.role_segments[role];
        stats.role_tokens[role] += len;
        if (corpus) stats.source_tokens[corpus->get(doc_id).source] += len;
      }
      ++stats.docs_per_sample_histogram[docs.size()];
    } catch (const json::exception& e) {
      throw ParseError(samples_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return stats;
}

}  // namespace litelong
