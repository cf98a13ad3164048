#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/analysis.hpp"
#include "litelong/assembly.hpp"
#include "litelong/backend.hpp"
#include "litelong/debate.hpp"
#include "litelong/inverted_index.hpp"

namespace litelong {

struct PathsConfig {
  std::vector<std::filesystem::path> corpus;
  std::filesystem::path taxonomy;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> hypernyms;
};

struct DebateConfig {
  BackendConfig debater_1;
  BackendConfig debater_2;
  BackendConfig judge;
  int n_per_debater = 4;
  RetentionStrategy retention = RetentionStrategy::filter_reject;
  int fixed_k = 10;
  JudgeMode judge_mode = JudgeMode::reject;
  double dedup_threshold = 0.8;
  double max_failure_fraction = 0.1;
  std::optional<std::size_t> full_budget;
  bool save_transcripts = false;
};

struct RetrievalConfig {
  Bm25Params bm25;
  std::size_t top_k = 256;
};

struct AssemblyConfig {
  AssemblyStrategy strategy = AssemblyStrategy::shuffle_concat;
  std::size_t target_tokens = 128000;
  std::size_t meta_chunk_tokens = 2048;
  std::size_t negatives_per_chunk = 3;
  std::size_t query_tokens = 64;
  bool allow_short = false;
  std::string joiner = "\n";
};

struct AnalysisConfig {
  DepthMode depth_mode = DepthMode::min_path;
};

/// Whole-pipeline configuration. Relative paths are resolved against the
/// directory of the config file.
struct PipelineConfig {
  PathsConfig paths;
  DebateConfig debate;
  RetrievalConfig retrieval;
  AssemblyConfig assembly;
  AnalysisConfig analysis;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = machine parallelism
  double scale_factor = 1.0;

  unsigned resolved_workers() const;
  DebateSettings debate_settings() const;
  NextLongOptions nextlong_options() const;

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

/// Command-line overrides; set fields replace config values.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool allow_short = false;
  bool save_transcripts = false;
  std::optional<BackendKind> backend;
  std::optional<std::filesystem::path> output_dir;
};

/// Parses a config document. Unknown keys are errors. Mock debaters that do
/// not set facet_count get the scaled per-debater count.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
void apply_overrides(PipelineConfig& config, const ConfigOverrides& overrides);

nlohmann::json to_json(const BackendConfig& b);
nlohmann::json to_json(const PipelineConfig& config);

/// Stage names used in checkpoints and hashes.
enum class Stage { topics, index, retrieve, assemble, analyze };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view s);
const std::vector<Stage>& all_stages();

/// SHA-256 over the canonical JSON of every setting that changes the
/// stage's output bytes. Input file contents are not included.
std::string stage_config_hash(const PipelineConfig& config, Stage stage);

}  // namespace litelong
