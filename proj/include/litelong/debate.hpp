#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/backend.hpp"
#include "litelong/taxonomy.hpp"
#include "litelong/topic.hpp"

namespace litelong {

enum class RetentionStrategy { filter_reject, keep_accept, keep_fixed_k };
/// What the judge is asked to list: the topics to drop, or the topics to keep.
enum class JudgeMode { reject, accept };

std::string_view to_string(RetentionStrategy s);
RetentionStrategy retention_from_string(std::string_view s);
std::string_view to_string(JudgeMode m);
JudgeMode judge_mode_from_string(std::string_view s);

/// One request/response exchange, kept for replay fixtures.
struct TranscriptEntry {
  std::string subcategory_code;
  std::string phase;  // generate_d1, generate_d2, critique_d1, critique_d2, judge
  int attempt = 0;    // 1 for the reformat retry
  std::vector<ChatMessage> request;
  std::string response;
};

nlohmann::json to_json(const TranscriptEntry& entry);
TranscriptEntry transcript_from_json(const nlohmann::json& j);

/// Per-round mutable state threaded through the three phases.
struct RoundContext {
  int reformat_retries = 0;
  bool record_transcripts = false;
  std::vector<TranscriptEntry> transcripts;
};

/// Asks one debater for up to n topics. Topics with empty or over-long text
/// are dropped; a reply with no usable topic gets one reformat retry.
/// `first_index` is the generation index of the first returned topic.
std::vector<Topic> generate_candidates(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                       Origin debater, int n, ChatBackend& backend,
                                       RoundContext& ctx, std::size_t first_index = 0);

/// Debater 2 critiques topics_1 and debater 1 critiques topics_2. Every
/// topic receives at least one critique from the other side.
std::vector<Critique> cross_critique(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                     const std::vector<Topic>& topics_1,
                                     const std::vector<Topic>& topics_2, ChatBackend& backend_1,
                                     ChatBackend& backend_2, RoundContext& ctx);

/// Exactly one verdict per topic, in topic order.
std::vector<JudgeVerdict> judge_round(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                      const std::vector<Topic>& topics,
                                      const std::vector<Critique>& critiques, ChatBackend& judge,
                                      JudgeMode mode, RoundContext& ctx);

/// Topics retained by a strategy, in t_total order. Throws ConsistencyError
/// when any topic of a completed round lacks a verdict.
std::vector<Topic> apply_retention(RetentionStrategy strategy, const TopicLedger& ledger, int k);

struct DedupResult {
  std::vector<Topic> kept;
  std::vector<DedupRemoval> removed;
};

/// Token 3-gram shingles of a topic (a shorter topic is one shingle).
std::vector<std::string> topic_shingles(std::string_view text);
double shingle_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Near-duplicate removal: topics are linked when the Jaccard similarity of
/// their shingle sets is >= threshold; each connected cluster keeps its
/// earliest member by (subcategory_code, origin, generation_index).
DedupResult dedup_topics(const std::vector<Topic>& topics, double threshold = 0.8);

/// round(full_budget * scale_factor).
std::size_t topic_budget(std::size_t full_budget, double scale_factor);

struct DebateSettings {
  int n_per_debater = 4;
  RetentionStrategy retention = RetentionStrategy::filter_reject;
  int fixed_k = 10;
  JudgeMode judge_mode = JudgeMode::reject;
  double dedup_threshold = 0.8;
  double max_failure_fraction = 0.1;
  double scale_factor = 1.0;
  /// Defaults to leaves * 2 * n_per_debater.
  std::optional<std::size_t> full_budget;
  unsigned workers = 1;
  bool save_transcripts = false;

  /// Per-debater request count after scaling: ceil(n_per_debater * scale_factor).
  int effective_n() const;
};

struct DebateBackends {
  std::shared_ptr<ChatBackend> debater_1;
  std::shared_ptr<ChatBackend> debater_2;
  std::shared_ptr<ChatBackend> judge;
};

struct DebateOutcome {
  TopicLedger ledger;
  std::vector<TranscriptEntry> transcripts;
  std::size_t budget = 0;
};

/// Runs generate -> critique -> judge for every leaf, concurrently across
/// leaves, committing results in leaf-code order. A round that fails on
/// transport or parsing is recorded and skipped; more than
/// max_failure_fraction failed rounds aborts with AbortedError.
DebateOutcome run_debate_pipeline(const Taxonomy& taxonomy, const DebateSettings& settings,
                                  const DebateBackends& backends);

/// Writes topics.jsonl: every topic of t_total with its status.
void write_topics_jsonl(const TopicLedger& ledger, const std::filesystem::path& path);
/// Reads topics.jsonl back; only_retained keeps status == "retained".
std::vector<Topic> read_topics_jsonl(const std::filesystem::path& path, bool only_retained);

/// Writes rounds.jsonl: one line per subcategory round.
void write_rounds_jsonl(const TopicLedger& ledger, const std::filesystem::path& path);

void write_transcripts_jsonl(const std::vector<TranscriptEntry>& entries, const std::filesystem::path& path);
std::vector<TranscriptEntry> read_transcripts_jsonl(const std::filesystem::path& path);

}  // namespace litelong
