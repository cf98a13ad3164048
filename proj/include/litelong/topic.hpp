#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace litelong {

enum class Origin { debater_1, debater_2 };
enum class Stance { support, object };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view s);
std::string_view to_string(Stance stance);
Stance stance_from_string(std::string_view s);

inline constexpr std::size_t kMaxTopicChars = 256;

/// The four critique criteria every critique must address.
inline const std::vector<std::string>& critique_criteria() {
  static const std::vector<std::string> kCriteria = {"relevance", "semantic_diversity",
                                                     "complementarity", "quality"};
  return kCriteria;
}

struct Topic {
  std::string topic_id;
  std::string subcategory_code;
  std::string text;
  std::string explanation;
  Origin origin = Origin::debater_1;
  std::size_t generation_index = 0;  // position within its round, debater_1 first
};

struct Critique {
  Origin critic = Origin::debater_1;
  std::string target_topic_id;
  std::map<std::string, std::string> criteria_notes;
  Stance stance = Stance::support;
};

struct JudgeVerdict {
  std::string topic_id;
  bool rejected = false;
  std::string reason;
};

/// Everything one subcategory round produced.
struct RoundRecord {
  std::string subcategory_code;
  bool failed = false;
  std::string error;
  std::vector<Topic> topics;
  std::vector<Critique> critiques;
  std::vector<JudgeVerdict> verdicts;
  int reformat_retries = 0;
};

struct DedupRemoval {
  std::string kept_topic_id;
  std::string removed_topic_id;
  double jaccard = 0.0;
};

/// Set algebra of the debate: t_total is every generated topic, t_reject the
/// judge's rejections, t_retained what the retention strategy keeps, and
/// t_final what survives near-duplicate removal and the topic budget.
struct TopicLedger {
  std::vector<Topic> t_total;
  std::set<std::string> t_reject;
  std::vector<Topic> t_retained;
  std::vector<Topic> t_final;
  std::map<std::string, RoundRecord> per_subcategory;
  std::vector<DedupRemoval> dedup_removed;
  std::vector<std::string> over_budget;  // topic ids trimmed by the budget cap
  std::vector<std::string> failed_subcategories;
};

}  // namespace litelong
