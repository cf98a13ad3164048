// litelong: command-line driver for the topic, index, retrieve, assemble
// and analyze stages.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "litelong/config.hpp"
#include "litelong/error.hpp"
#include "litelong/pipeline.hpp"

namespace {

using json = nlohmann::json;

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"litelong: topic-driven long-context training data pipeline"};

  std::string config_path;
  std::string stage_name = "all";
  std::int64_t seed = 0;
  unsigned workers = 0;
  std::string backend;
  std::string out_dir;
  litelong::ConfigOverrides overrides;

  app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
  app.add_option("--stage", stage_name, "Stage to run")
      ->check(CLI::IsMember({"topics", "index", "retrieve", "assemble", "analyze", "all"}));
  auto* seed_opt = app.add_option("--seed", seed, "Override the global seed")->check(CLI::NonNegativeNumber);
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads (0 = machine parallelism)");
  app.add_flag("--allow-short", overrides.allow_short, "Keep samples shorter than target_tokens");
  app.add_flag("--save-transcripts", overrides.save_transcripts, "Write transcripts.jsonl in the topics stage");
  auto* backend_opt = app.add_option("--backend", backend, "Override every model backend")
                          ->check(CLI::IsMember({"http_chat", "mock"}));
  auto* out_opt = app.add_option("--out", out_dir, "Override paths.output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }

  try {
    if (*seed_opt) overrides.seed = static_cast<std::uint64_t>(seed);
    if (*workers_opt) overrides.workers = workers;
    if (*backend_opt) overrides.backend = litelong::backend_kind_from_string(backend);
    if (*out_opt) overrides.output_dir = std::filesystem::absolute(out_dir);

    litelong::PipelineConfig config = litelong::load_config(config_path);
    litelong::apply_overrides(config, overrides);
    litelong::Pipeline pipeline(std::move(config));

    auto print = [](const litelong::StageOutcome& o) {
      std::cout << "stage " << litelong::to_string(o.stage) << ": " << (o.skipped ? "skipped" : "ran");
      std::cout << " (" << o.seconds << " s) " << o.summary.dump() << std::endl;
    };
    if (stage_name == "all") {
      for (litelong::Stage s : litelong::all_stages()) print(pipeline.run(s));
    } else {
      print(pipeline.run(litelong::stage_from_string(stage_name)));
    }
  } catch (const litelong::Error& e) {
    return report_error(std::string(litelong::to_string(e.kind())), e.what(), 1);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), 1);
  }
  return 0;
}
