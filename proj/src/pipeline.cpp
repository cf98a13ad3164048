#include "litelong/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>

#include "litelong/analysis.hpp"
#include "litelong/assembly.hpp"
#include "litelong/corpus.hpp"
#include "litelong/error.hpp"
#include "litelong/hashing.hpp"
#include "litelong/inverted_index.hpp"
#include "litelong/parallel.hpp"
#include "litelong/random.hpp"
#include "litelong/taxonomy.hpp"

namespace litelong {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTopics = "topics.jsonl";
constexpr const char* kRounds = "rounds.jsonl";
constexpr const char* kFailures = "failures.json";
constexpr const char* kTranscripts = "transcripts.jsonl";
constexpr const char* kIndex = "index.llidx";
constexpr const char* kSkipped = "skipped_lines.jsonl";
constexpr const char* kRetrievals = "retrievals.jsonl";
constexpr const char* kSamples = "samples.jsonl";
constexpr const char* kSamplesManifest = "manifest.json";
constexpr const char* kAbstraction = "abstraction_report.json";
constexpr const char* kStats = "stats_report.json";

void write_text_file(const fs::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    out.close();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

void write_retrievals(const std::vector<RetrievalResult>& results, const fs::path& path) {
  std::string text;
  for (const auto& r : results) {
    json hits = json::array();
    for (const auto& h : r.hits) hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
    text += json{{"topic_id", r.topic_id}, {"hits", hits}}.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<RetrievalResult> read_retrievals(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RetrievalResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      RetrievalResult r;
      r.topic_id = j.at("topic_id").get<std::string>();
      for (const auto& h : j.at("hits")) r.hits.push_back({h.at("doc_id").get<std::string>(), h.at("score").get<double>()});
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct Pipeline::StageRun {
  Stage stage;
  std::string config_hash;
  std::vector<std::pair<std::string, fs::path>> inputs;
  std::vector<std::string> outputs;  // file names under output_dir
};

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) { config_.validate(); }

json Pipeline::load_state() const {
  const fs::path path = output(".litelong/state.json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return json{{"stages", json::object()}};
  try {
    json j = json::parse(in);
    if (j.is_object() && j.contains("stages") && j["stages"].is_object()) return j;
  } catch (const json::exception&) {
  }
  // An unreadable state file only costs a rerun.
  return json{{"stages", json::object()}};
}

void Pipeline::save_state(const json& state) const {
  fs::create_directories(output(".litelong"));
  write_json_file(output(".litelong/state.json"), state);
}

StageOutcome Pipeline::run(Stage stage) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(config_.paths.output_dir);
  fs::create_directories(output("manifests"));

  StageRun run{stage, stage_config_hash(config_, stage), {}, {}};
  auto need = [&](const std::string& name, const char* producer) {
    const fs::path p = output(name);
    if (!fs::is_regular_file(p)) {
      throw ValidationError("stage " + std::string(to_string(stage)) + " needs " + p.string() +
                            "; run stage " + producer + " first");
    }
    run.inputs.emplace_back(name, p);
  };
  auto corpus_inputs = [&] {
    for (std::size_t i = 0; i < config_.paths.corpus.size(); ++i) {
      run.inputs.emplace_back("corpus/" + std::to_string(i), config_.paths.corpus[i]);
    }
  };
  switch (stage) {
    case Stage::topics:
      run.inputs.emplace_back("taxonomy", config_.paths.taxonomy);
      break;
    case Stage::index:
      corpus_inputs();
      break;
    case Stage::retrieve:
      need(kIndex, "index");
      need(kTopics, "topics");
      break;
    case Stage::assemble:
      corpus_inputs();
      need(kIndex, "index");
      need(kRetrievals, "retrieve");
      break;
    case Stage::analyze:
      corpus_inputs();
      need(kTopics, "topics");
      need(kSamples, "assemble");
      if (config_.paths.hypernyms) run.inputs.emplace_back("hypernyms", *config_.paths.hypernyms);
      break;
  }

  json input_digests = json::object();
  for (const auto& [name, path] : run.inputs) input_digests[name] = file_sha256_hex(path);
  const std::string key = sha256_hex(json{{"config_hash", run.config_hash}, {"inputs", input_digests}}.dump());
  const std::string stage_name(to_string(stage));
  const fs::path manifest_path = output("manifests/" + stage_name + ".json");

  json state = load_state();
  StageOutcome outcome;
  outcome.stage = stage;
  outcome.manifest = manifest_path;

  if (state["stages"].contains(stage_name)) {
    const json& prev = state["stages"][stage_name];
    bool fresh = prev.value("key", "") == key && prev.contains("outputs") && prev["outputs"].is_object();
    if (fresh) {
      for (const auto& [name, digest] : prev["outputs"].items()) {
        const fs::path p = output(name);
        if (!fs::is_regular_file(p) || file_sha256_hex(p) != digest.get<std::string>()) {
          fresh = false;
          break;
        }
      }
    }
    if (fresh) {
      std::ifstream in(manifest_path, std::ios::binary);
      outcome.skipped = true;
      outcome.summary = json::parse(in).value("summary", json::object());
      outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      return outcome;
    }
    state["stages"].erase(stage_name);
    save_state(state);
  }

  json summary;
  switch (stage) {
    case Stage::topics: summary = run_topics(run); break;
    case Stage::index: summary = run_index(run); break;
    case Stage::retrieve: summary = run_retrieve(run); break;
    case Stage::assemble: summary = run_assemble(run); break;
    case Stage::analyze: summary = run_analyze(run); break;
  }

  json output_digests = json::object();
  for (const auto& name : run.outputs) output_digests[name] = file_sha256_hex(output(name));
  write_json_file(manifest_path, json{{"stage", stage_name},
                                      {"config_hash", run.config_hash},
                                      {"checkpoint_key", key},
                                      {"inputs", input_digests},
                                      {"outputs", output_digests},
                                      {"summary", summary}});
  output_digests["manifests/" + stage_name + ".json"] = file_sha256_hex(manifest_path);

  state["stages"][stage_name] = json{{"key", key}, {"outputs", output_digests}};
  save_state(state);

  outcome.summary = std::move(summary);
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return outcome;
}

std::vector<StageOutcome> Pipeline::run_all() {
  std::vector<StageOutcome> out;
  for (Stage s : all_stages()) out.push_back(run(s));
  return out;
}

json Pipeline::run_topics(StageRun& run) {
  const Taxonomy taxonomy = load_taxonomy(config_.paths.taxonomy);
  DebateBackends backends;
  if (backends_) {
    backends = *backends_;
  } else {
    backends = {make_backend(config_.debate.debater_1), make_backend(config_.debate.debater_2),
                make_backend(config_.debate.judge)};
  }
  const DebateSettings settings = config_.debate_settings();
  const DebateOutcome outcome = run_debate_pipeline(taxonomy, settings, backends);
  const TopicLedger& ledger = outcome.ledger;

  write_topics_jsonl(ledger, output(kTopics));
  write_rounds_jsonl(ledger, output(kRounds));
  json failed = json::array();
  for (const auto& code : ledger.failed_subcategories) {
    failed.push_back({{"subcategory_code", code}, {"error", ledger.per_subcategory.at(code).error}});
  }
  write_json_file(output(kFailures), json{{"rounds", taxonomy.subcategories().size()},
                                          {"failed", ledger.failed_subcategories.size()},
                                          {"failures", failed}});
  run.outputs = {kTopics, kRounds, kFailures};
  if (settings.save_transcripts) {
    write_transcripts_jsonl(outcome.transcripts, output(kTranscripts));
    run.outputs.push_back(kTranscripts);
  }

  int reformat_retries = 0;
  for (const auto& [code, round] : ledger.per_subcategory) reformat_retries += round.reformat_retries;
  return json{{"subcategories", taxonomy.subcategories().size()},
              {"n_per_debater", settings.effective_n()},
              {"t_total", ledger.t_total.size()},
              {"t_reject", ledger.t_reject.size()},
              {"t_retained", ledger.t_retained.size()},
              {"dedup_removed", ledger.dedup_removed.size()},
              {"over_budget", ledger.over_budget.size()},
              {"t_final", ledger.t_final.size()},
              {"budget", outcome.budget},
              {"retention", to_string(settings.retention)},
              {"failed_subcategories", ledger.failed_subcategories.size()},
              {"reformat_retries", reformat_retries}};
}

json Pipeline::run_index(StageRun& run) {
  const unsigned workers = config_.resolved_workers();
  const Corpus corpus = ingest_corpus(config_.paths.corpus, workers);
  const InvertedIndex index = build_index(corpus, config_.retrieval.bm25, workers);
  index.save(output(kIndex));
  write_skip_report(corpus.skipped(), output(kSkipped));
  run.outputs = {kIndex, kSkipped};

  const CorpusStats stats = corpus.stats();
  return json{{"documents", stats.doc_count},
              {"total_tokens", stats.total_tokens},
              {"avg_doc_tokens", stats.avg_doc_tokens},
              {"sources", stats.source_breakdown},
              {"skipped_lines", corpus.skipped().size()},
              {"terms", index.terms().size()},
              {"postings", index.total_postings()}};
}

json Pipeline::run_retrieve(StageRun& run) {
  const InvertedIndex index = InvertedIndex::load(output(kIndex));
  std::vector<Topic> topics = read_topics_jsonl(output(kTopics), true);
  std::sort(topics.begin(), topics.end(), [](const Topic& a, const Topic& b) { return a.topic_id < b.topic_id; });

  std::vector<RetrievalResult> results(topics.size());
  std::vector<bool> empty_query(topics.size(), false);
  parallel_for(topics.size(), config_.resolved_workers(), [&](std::size_t i) {
    try {
      results[i] = retrieve(index, topics[i], config_.retrieval.top_k);
    } catch (const ValidationError&) {
      // A topic with no indexable token retrieves nothing.
      results[i].topic_id = topics[i].topic_id;
      empty_query[i] = true;
    }
  });
  write_retrievals(results, output(kRetrievals));
  run.outputs = {kRetrievals};

  std::size_t hits = 0, no_hits = 0;
  json warnings = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    hits += results[i].hits.size();
    if (results[i].hits.empty()) ++no_hits;
    if (empty_query[i]) warnings.push_back("topic " + topics[i].topic_id + ": no indexable terms");
  }
  return json{{"topics", topics.size()},
              {"top_k", config_.retrieval.top_k},
              {"hits", hits},
              {"topics_without_hits", no_hits},
              {"warnings", warnings}};
}

json Pipeline::run_assemble(StageRun& run) {
  const unsigned workers = config_.resolved_workers();
  const Corpus corpus = ingest_corpus(config_.paths.corpus, workers);
  const InvertedIndex index = InvertedIndex::load(output(kIndex));
  const std::vector<RetrievalResult> retrievals = read_retrievals(output(kRetrievals));
  const auto& a = config_.assembly;

  struct PerTopic {
    std::vector<LongSample> samples;
    std::vector<std::string> warnings;
    std::size_t dropped_short = 0;
  };
  std::vector<PerTopic> per_topic(retrievals.size());
  parallel_for(retrievals.size(), workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(config_.seed, retrievals[i].topic_id);
    auto& slot = per_topic[i];
    if (a.strategy == AssemblyStrategy::shuffle_concat) {
      ShuffleResult r = assemble_shuffle(retrievals[i], corpus, a.target_tokens, seed, a.allow_short);
      slot.samples = std::move(r.samples);
      slot.warnings = std::move(r.warnings);
      slot.dropped_short = r.dropped_short;
    } else {
      if (retrievals[i].hits.empty()) {
        slot.warnings.push_back("topic " + retrievals[i].topic_id + ": empty retrieval result, no samples");
        return;
      }
      NextLongResult r = assemble_nextlong(retrievals[i], corpus, index, config_.nextlong_options(), seed);
      slot.warnings = std::move(r.warnings);
      if (r.complete || a.allow_short) {
        slot.samples.push_back(std::move(r.sample));
      } else {
        ++slot.dropped_short;
      }
    }
  });

  SamplesManifest base;
  base.target_tokens = a.target_tokens;
  base.strategy = a.strategy;
  base.config_hash = run.config_hash;
  std::vector<LongSample> samples;
  for (auto& t : per_topic) {
    for (auto& s : t.samples) samples.push_back(std::move(s));
    for (auto& w : t.warnings) base.warnings.push_back(std::move(w));
    base.dropped_short += t.dropped_short;
  }
  const SamplesManifest manifest = write_samples(samples, corpus, output(kSamples), base, a.joiner);
  write_json_file(output(kSamplesManifest), manifest.to_json());
  run.outputs = {kSamples, kSamplesManifest};

  return json{{"topics", retrievals.size()},
              {"samples", manifest.samples},
              {"total_tokens", manifest.total_tokens},
              {"target_tokens", manifest.target_tokens},
              {"strategy", to_string(manifest.strategy)},
              {"dropped_short", manifest.dropped_short},
              {"warnings", manifest.warnings.size()}};
}

json Pipeline::run_analyze(StageRun& run) {
  const Corpus corpus = ingest_corpus(config_.paths.corpus, config_.resolved_workers());
  const SampleStats stats = sample_stats(output(kSamples), &corpus);
  const CorpusStats cstats = corpus.stats();
  json stats_json = stats.to_json();
  stats_json["corpus"] = {{"documents", cstats.doc_count},
                          {"total_tokens", cstats.total_tokens},
                          {"avg_doc_tokens", cstats.avg_doc_tokens},
                          {"sources", cstats.source_breakdown}};
  write_json_file(output(kStats), stats_json);
  run.outputs = {kStats};

  json summary{{"samples", stats.samples}, {"total_tokens", stats.total_tokens}};
  if (config_.paths.hypernyms) {
    const HypernymGraph graph = load_hypernyms(*config_.paths.hypernyms);
    const std::vector<Topic> topics = read_topics_jsonl(output(kTopics), true);
    const AbstractionReport report = classify_topics(graph, topics, config_.analysis.depth_mode);
    write_json_file(output(kAbstraction), report.to_json());
    run.outputs.push_back(kAbstraction);
    summary["classified_topics"] = report.classified_topics;
    summary["share_abstract"] = report.share_abstract;
    summary["share_specific"] = report.share_specific;
    summary["unknown_topics"] = report.unknown_topics;
  } else {
    summary["abstraction"] = "skipped: paths.hypernyms not set";
  }
  return summary;
}

}  // namespace litelong
