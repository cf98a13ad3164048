#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/config.hpp"
#include "litelong/debate.hpp"

namespace litelong {

struct StageOutcome {
  Stage stage = Stage::topics;
  bool skipped = false;
  std::filesystem::path manifest;
  nlohmann::json summary;  // stage-specific counts, copied from the manifest
  double seconds = 0.0;
};

/// Stage driver with checkpoints in <output_dir>/.litelong/state.json.
///
/// A stage is skipped when its checkpoint key (stage config hash plus the
/// digests of its input files) equals the recorded one and every recorded
/// output still exists with the recorded digest. Outputs of a stage are
/// inputs of the next, so any upstream change invalidates the downstream.
class Pipeline {
 public:
  /// Validates the config.
  explicit Pipeline(PipelineConfig config);

  /// Replaces the backends built from the config (used with replay fixtures).
  void set_backends(DebateBackends backends) { backends_ = std::move(backends); }

  StageOutcome run(Stage stage);
  std::vector<StageOutcome> run_all();

  const PipelineConfig& config() const { return config_; }
  std::filesystem::path output(const std::string& name) const { return config_.paths.output_dir / name; }

 private:
  struct StageRun;

  nlohmann::json load_state() const;
  void save_state(const nlohmann::json& state) const;

  nlohmann::json run_topics(StageRun& run);
  nlohmann::json run_index(StageRun& run);
  nlohmann::json run_retrieve(StageRun& run);
  nlohmann::json run_assemble(StageRun& run);
  nlohmann::json run_analyze(StageRun& run);

  PipelineConfig config_;
  std::optional<DebateBackends> backends_;
};

/// Writes JSON (pretty-printed) through a temporary file.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace litelong
