#include "litelong/config.hpp"

#include <fstream>
#include <set>

#include "litelong/error.hpp"
#include "litelong/hashing.hpp"
#include "litelong/parallel.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(field(key) + " has the wrong type");
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ValidationError("unknown config key " + field(key));
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

BackendConfig parse_backend(const json& j, const std::string& where, MockRole role, bool& facet_set) {
  BackendConfig b;
  b.mock.role = role;
  ObjectReader r(j, where);
  std::string kind = std::string(to_string(b.kind));
  r.get("kind", kind);
  b.kind = backend_kind_from_string(kind);
  r.get("endpoint_url", b.endpoint_url);
  r.get("model_name", b.model_name);
  r.get("temperature", b.temperature);
  r.get("seed", b.seed);
  r.get("max_in_flight", b.max_in_flight);
  r.get("timeout_ms", b.timeout_ms);
  r.get("max_retries", b.max_retries);
  r.get("backoff_base_ms", b.backoff_base_ms);
  r.get("api_key_env", b.api_key_env);
  facet_set = false;
  if (r.has("mock")) {
    ObjectReader m(r.raw("mock"), r.field("mock"));
    m.get("reject_every", b.mock.reject_every);
    facet_set = m.has("facet_count");
    m.get("facet_count", b.mock.facet_count);
    m.get("seed", b.mock.seed);
    m.finish();
  }
  r.finish();
  return b;
}

}  // namespace

unsigned PipelineConfig::resolved_workers() const { return workers == 0 ? default_workers() : workers; }

DebateSettings PipelineConfig::debate_settings() const {
  DebateSettings s;
  s.n_per_debater = debate.n_per_debater;
  s.retention = debate.retention;
  s.fixed_k = debate.fixed_k;
  s.judge_mode = debate.judge_mode;
  s.dedup_threshold = debate.dedup_threshold;
  s.max_failure_fraction = debate.max_failure_fraction;
  s.scale_factor = scale_factor;
  s.full_budget = debate.full_budget;
  s.workers = resolved_workers();
  s.save_transcripts = debate.save_transcripts;
  return s;
}

NextLongOptions PipelineConfig::nextlong_options() const {
  NextLongOptions o;
  o.target_tokens = assembly.target_tokens;
  o.meta_chunk_tokens = assembly.meta_chunk_tokens;
  o.negatives_per_chunk = assembly.negatives_per_chunk;
  o.query_tokens = assembly.query_tokens;
  return o;
}

void PipelineConfig::validate() const {
  if (paths.corpus.empty()) throw ValidationError("paths.corpus must list at least one file");
  for (const auto& p : paths.corpus) {
    if (!fs::is_regular_file(p)) throw ValidationError("paths.corpus: no such file " + p.string());
  }
  if (!fs::is_regular_file(paths.taxonomy)) {
    throw ValidationError("paths.taxonomy: no such file " + paths.taxonomy.string());
  }
  if (paths.hypernyms && !fs::is_regular_file(*paths.hypernyms)) {
    throw ValidationError("paths.hypernyms: no such file " + paths.hypernyms->string());
  }
  if (paths.output_dir.empty()) throw ValidationError("paths.output_dir must be set");
  if (fs::exists(paths.output_dir) && !fs::is_directory(paths.output_dir)) {
    throw ValidationError("paths.output_dir is not a directory: " + paths.output_dir.string());
  }

  if (!(scale_factor > 0.0 && scale_factor <= 4.0)) throw ValidationError("scale_factor must be in (0, 4]");
  if (debate.n_per_debater < 1) throw ValidationError("debate.n_per_debater must be >= 1");
  if (debate.fixed_k < 1) throw ValidationError("debate.fixed_k must be >= 1");
  if (!(debate.dedup_threshold > 0.0 && debate.dedup_threshold <= 1.0)) {
    throw ValidationError("debate.dedup_threshold must be in (0, 1]");
  }
  if (!(debate.max_failure_fraction >= 0.0 && debate.max_failure_fraction <= 1.0)) {
    throw ValidationError("debate.max_failure_fraction must be in [0, 1]");
  }
  debate.debater_1.validate();
  debate.debater_2.validate();
  debate.judge.validate();

  if (!(retrieval.bm25.k1 > 0.0)) throw ValidationError("retrieval.k1 must be > 0");
  if (!(retrieval.bm25.b >= 0.0 && retrieval.bm25.b <= 1.0)) throw ValidationError("retrieval.b must be in [0, 1]");
  if (retrieval.top_k < 1) throw ValidationError("retrieval.top_k must be >= 1");

  if (assembly.target_tokens < 1) throw ValidationError("assembly.target_tokens must be >= 1");
  if (assembly.meta_chunk_tokens < 1) throw ValidationError("assembly.meta_chunk_tokens must be >= 1");
  if (assembly.target_tokens < assembly.meta_chunk_tokens) {
    throw ValidationError("assembly.target_tokens must be >= assembly.meta_chunk_tokens");
  }
  if (assembly.query_tokens < 1) throw ValidationError("assembly.query_tokens must be >= 1");
  if (assembly.joiner.empty() || count_tokens(assembly.joiner) != 0) {
    throw ValidationError("assembly.joiner must be non-empty and contain no word characters");
  }
}

PipelineConfig parse_config(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  ObjectReader top(j, "config");
  top.get("seed", c.seed);
  top.get("workers", c.workers);
  top.get("scale_factor", c.scale_factor);

  if (!top.has("paths")) throw ValidationError("config.paths is required");
  {
    ObjectReader r(top.raw("paths"), "paths");
    std::vector<std::string> corpus;
    if (r.has("corpus") && r.raw("corpus").is_string()) {
      corpus.push_back(r.raw("corpus").get<std::string>());
    } else {
      r.get("corpus", corpus);
    }
    for (const auto& p : corpus) c.paths.corpus.push_back(resolve(base_dir, p));
    std::string taxonomy, output_dir = "out", hypernyms;
    r.get("taxonomy", taxonomy);
    r.get("output_dir", output_dir);
    r.get("hypernyms", hypernyms);
    if (taxonomy.empty()) throw ValidationError("paths.taxonomy is required");
    c.paths.taxonomy = resolve(base_dir, taxonomy);
    c.paths.output_dir = resolve(base_dir, output_dir);
    if (!hypernyms.empty()) c.paths.hypernyms = resolve(base_dir, hypernyms);
    r.finish();
  }

  bool facet_1 = false, facet_2 = false, facet_judge = false;
  c.debate.debater_1.mock.role = MockRole::debater;
  c.debate.debater_2.mock.role = MockRole::debater;
  c.debate.judge.mock.role = MockRole::judge;
  if (top.has("debate")) {
    ObjectReader r(top.raw("debate"), "debate");
    r.get("n_per_debater", c.debate.n_per_debater);
    std::string retention(to_string(c.debate.retention)), judge_mode(to_string(c.debate.judge_mode));
    r.get("retention", retention);
    r.get("judge_mode", judge_mode);
    c.debate.retention = retention_from_string(retention);
    c.debate.judge_mode = judge_mode_from_string(judge_mode);
    r.get("fixed_k", c.debate.fixed_k);
    r.get("dedup_threshold", c.debate.dedup_threshold);
    r.get("max_failure_fraction", c.debate.max_failure_fraction);
    if (r.has("full_budget")) {
      std::size_t full = 0;
      r.get("full_budget", full);
      c.debate.full_budget = full;
    }
    r.get("save_transcripts", c.debate.save_transcripts);
    if (r.has("backends")) {
      ObjectReader b(r.raw("backends"), "debate.backends");
      if (b.has("debater_1")) {
        c.debate.debater_1 = parse_backend(b.raw("debater_1"), b.field("debater_1"), MockRole::debater, facet_1);
      }
      if (b.has("debater_2")) {
        c.debate.debater_2 = parse_backend(b.raw("debater_2"), b.field("debater_2"), MockRole::debater, facet_2);
      }
      if (b.has("judge")) {
        c.debate.judge = parse_backend(b.raw("judge"), b.field("judge"), MockRole::judge, facet_judge);
      }
      b.finish();
    }
    r.finish();
  }
  const int n_eff = c.debate_settings().effective_n();
  if (!facet_1) c.debate.debater_1.mock.facet_count = n_eff;
  if (!facet_2) c.debate.debater_2.mock.facet_count = n_eff;

  if (top.has("retrieval")) {
    ObjectReader r(top.raw("retrieval"), "retrieval");
    r.get("k1", c.retrieval.bm25.k1);
    r.get("b", c.retrieval.bm25.b);
    r.get("top_k", c.retrieval.top_k);
    r.finish();
  }

  if (top.has("assembly")) {
    ObjectReader r(top.raw("assembly"), "assembly");
    std::string strategy(to_string(c.assembly.strategy));
    r.get("strategy", strategy);
    c.assembly.strategy = assembly_strategy_from_string(strategy);
    r.get("target_tokens", c.assembly.target_tokens);
    r.get("meta_chunk_tokens", c.assembly.meta_chunk_tokens);
    r.get("negatives_per_chunk", c.assembly.negatives_per_chunk);
    r.get("query_tokens", c.assembly.query_tokens);
    r.get("allow_short", c.assembly.allow_short);
    r.get("joiner", c.assembly.joiner);
    r.finish();
  }

  if (top.has("analysis")) {
    ObjectReader r(top.raw("analysis"), "analysis");
    std::string mode(to_string(c.analysis.depth_mode));
    r.get("depth_mode", mode);
    c.analysis.depth_mode = depth_mode_from_string(mode);
    r.finish();
  }
  top.finish();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  const fs::path base = fs::absolute(path).parent_path();
  return parse_config(j, base);
}

void apply_overrides(PipelineConfig& config, const ConfigOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  if (o.allow_short) config.assembly.allow_short = true;
  if (o.save_transcripts) config.debate.save_transcripts = true;
  if (o.backend) {
    config.debate.debater_1.kind = *o.backend;
    config.debate.debater_2.kind = *o.backend;
    config.debate.judge.kind = *o.backend;
  }
  if (o.output_dir) config.paths.output_dir = *o.output_dir;
}

json to_json(const BackendConfig& b) {
  return json{{"kind", to_string(b.kind)},
              {"endpoint_url", b.endpoint_url},
              {"model_name", b.model_name},
              {"temperature", b.temperature},
              {"seed", b.seed},
              {"max_in_flight", b.max_in_flight},
              {"timeout_ms", b.timeout_ms},
              {"max_retries", b.max_retries},
              {"backoff_base_ms", b.backoff_base_ms},
              {"api_key_env", b.api_key_env},
              {"mock",
               {{"role", to_string(b.mock.role)},
                {"reject_every", b.mock.reject_every},
                {"facet_count", b.mock.facet_count},
                {"seed", b.mock.seed}}}};
}

namespace {

json debate_json(const PipelineConfig& c) {
  return json{{"n_per_debater", c.debate.n_per_debater},
              {"retention", to_string(c.debate.retention)},
              {"fixed_k", c.debate.fixed_k},
              {"judge_mode", to_string(c.debate.judge_mode)},
              {"dedup_threshold", c.debate.dedup_threshold},
              {"max_failure_fraction", c.debate.max_failure_fraction},
              {"full_budget", c.debate.full_budget ? json(*c.debate.full_budget) : json(nullptr)},
              {"save_transcripts", c.debate.save_transcripts},
              {"backends",
               {{"debater_1", to_json(c.debate.debater_1)},
                {"debater_2", to_json(c.debate.debater_2)},
                {"judge", to_json(c.debate.judge)}}}};
}

json retrieval_json(const PipelineConfig& c) {
  return json{{"k1", c.retrieval.bm25.k1}, {"b", c.retrieval.bm25.b}, {"top_k", c.retrieval.top_k}};
}

json assembly_json(const PipelineConfig& c) {
  return json{{"strategy", to_string(c.assembly.strategy)},
              {"target_tokens", c.assembly.target_tokens},
              {"meta_chunk_tokens", c.assembly.meta_chunk_tokens},
              {"negatives_per_chunk", c.assembly.negatives_per_chunk},
              {"query_tokens", c.assembly.query_tokens},
              {"allow_short", c.assembly.allow_short},
              {"joiner", c.assembly.joiner}};
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json corpus = json::array();
  for (const auto& p : c.paths.corpus) corpus.push_back(p.string());
  return json{{"seed", c.seed},
              {"workers", c.workers},
              {"scale_factor", c.scale_factor},
              {"paths",
               {{"corpus", corpus},
                {"taxonomy", c.paths.taxonomy.string()},
                {"output_dir", c.paths.output_dir.string()},
                {"hypernyms", c.paths.hypernyms ? json(c.paths.hypernyms->string()) : json(nullptr)}}},
              {"debate", debate_json(c)},
              {"retrieval", retrieval_json(c)},
              {"assembly", assembly_json(c)},
              {"analysis", {{"depth_mode", to_string(c.analysis.depth_mode)}}}};
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::topics: return "topics";
    case Stage::index: return "index";
    case Stage::retrieve: return "retrieve";
    case Stage::assemble: return "assemble";
    case Stage::analyze: return "analyze";
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  for (Stage st : all_stages()) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("unknown stage " + std::string(s));
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::topics, Stage::index, Stage::retrieve, Stage::assemble,
                                         Stage::analyze};
  return stages;
}

std::string stage_config_hash(const PipelineConfig& c, Stage stage) {
  // Workers and paths are excluded: outputs do not depend on them, and
  // input contents enter the checkpoint key as file digests.
  json j{{"stage", to_string(stage)}, {"format", 1}};
  switch (stage) {
    case Stage::topics:
      j["debate"] = debate_json(c);
      j["scale_factor"] = c.scale_factor;
      j["seed"] = c.seed;
      break;
    case Stage::index:
      j["bm25"] = {{"k1", c.retrieval.bm25.k1}, {"b", c.retrieval.bm25.b}};
      break;
    case Stage::retrieve:
      j["retrieval"] = retrieval_json(c);
      break;
    case Stage::assemble:
      j["assembly"] = assembly_json(c);
      j["seed"] = c.seed;
      break;
    case Stage::analyze:
      j["depth_mode"] = to_string(c.analysis.depth_mode);
      j["hypernyms"] = c.paths.hypernyms.has_value();
      break;
  }
  return sha256_hex(j.dump());
}

}  // namespace litelong
