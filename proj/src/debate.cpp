#include "litelong/debate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "litelong/error.hpp"
#include "litelong/parallel.hpp"
#include "litelong/prompts.hpp"
#include "litelong/tokenizer.hpp"

namespace litelong {

using json = nlohmann::json;

std::string_view to_string(Origin origin) { return origin == Origin::debater_1 ? "debater_1" : "debater_2"; }

Origin origin_from_string(std::string_view s) {
  if (s == "debater_1") return Origin::debater_1;
  if (s == "debater_2") return Origin::debater_2;
  throw ParseError("unknown topic origin " + std::string(s));
}

std::string_view to_string(Stance stance) { return stance == Stance::support ? "support" : "object"; }

Stance stance_from_string(std::string_view s) {
  if (s == "support") return Stance::support;
  if (s == "object") return Stance::object;
  throw ParseError("unknown critique stance " + std::string(s));
}

std::string_view to_string(RetentionStrategy s) {
  switch (s) {
    case RetentionStrategy::filter_reject: return "filter_reject";
    case RetentionStrategy::keep_accept: return "keep_accept";
    case RetentionStrategy::keep_fixed_k: return "keep_fixed_k";
  }
  return "filter_reject";
}

RetentionStrategy retention_from_string(std::string_view s) {
  if (s == "filter_reject") return RetentionStrategy::filter_reject;
  if (s == "keep_accept") return RetentionStrategy::keep_accept;
  if (s == "keep_fixed_k") return RetentionStrategy::keep_fixed_k;
  throw ValidationError("unknown retention strategy " + std::string(s));
}

std::string_view to_string(JudgeMode m) { return m == JudgeMode::reject ? "reject" : "accept"; }

JudgeMode judge_mode_from_string(std::string_view s) {
  if (s == "reject") return JudgeMode::reject;
  if (s == "accept") return JudgeMode::accept;
  throw ValidationError("unknown judge mode " + std::string(s));
}

json to_json(const TranscriptEntry& e) {
  return json{{"subcategory_code", e.subcategory_code},
              {"phase", e.phase},
              {"attempt", e.attempt},
              {"request", {{"messages", to_json(e.request)}}},
              {"response", e.response}};
}

TranscriptEntry transcript_from_json(const json& j) {
  TranscriptEntry e;
  e.subcategory_code = j.at("subcategory_code").get<std::string>();
  e.phase = j.at("phase").get<std::string>();
  e.attempt = j.value("attempt", 0);
  for (const auto& m : j.at("request").at("messages")) {
    e.request.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  e.response = j.at("response").get<std::string>();
  return e;
}

namespace {

constexpr std::string_view kSystemPrompt =
    "You take part in a structured topic-generation panel. Follow the requested JSON format exactly.";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

// Models often wrap JSON in prose or code fences; take the outermost object.
json parse_model_json(const std::string& reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ParseError("reply contains no JSON object");
  }
  try {
    return json::parse(reply.substr(open, close - open + 1));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("reply is not valid JSON: ") + e.what());
  }
}

std::string debater_tag(Origin o) { return o == Origin::debater_1 ? "d1" : "d2"; }
int debater_number(Origin o) { return o == Origin::debater_1 ? 1 : 2; }

std::string make_topic_id(const std::string& code, Origin o, std::size_t k) {
  std::string num = std::to_string(k);
  if (num.size() < 2) num.insert(0, 2 - num.size(), '0');
  return code + "-" + debater_tag(o) + "-" + num;
}

// Sends a request and parses the reply; on a parse failure, sends one
// reformat request carrying the bad reply and the error.
template <typename Parse>
auto call_with_reformat(ChatBackend& backend, std::vector<ChatMessage> messages, const std::string& context_block,
                        const std::string& code, const std::string& phase, RoundContext& ctx, Parse&& parse) {
  auto record = [&](const std::vector<ChatMessage>& req, const std::string& resp, int attempt) {
    if (ctx.record_transcripts) ctx.transcripts.push_back({code, phase, attempt, req, resp});
  };
  std::string reply = backend.complete(messages);
  record(messages, reply, 0);
  try {
    return parse(reply);
  } catch (const ParseError& first) {
    ++ctx.reformat_retries;
    messages.push_back({"assistant", reply});
    messages.push_back({"user", render_prompt("reformat", {{"error", first.what()}, {"round_context", context_block}})});
    reply = backend.complete(messages);
    record(messages, reply, 1);
    try {
      return parse(reply);
    } catch (const ParseError& second) {
      throw ParseError(phase + " for " + code + ": unusable reply after reformat retry: " + second.what());
    }
  }
}

std::string format_topics(const std::vector<Topic>& topics) {
  std::ostringstream out;
  for (const auto& t : topics) {
    out << "- [" << t.topic_id << "] " << t.text;
    if (!t.explanation.empty()) out << "\n  explanation: " << t.explanation;
    out << '\n';
  }
  return trim(out.str());
}

std::string format_critiques(const std::vector<Critique>& critiques) {
  std::ostringstream out;
  for (const auto& c : critiques) {
    out << "- [" << c.target_topic_id << "] " << to_string(c.critic) << " " << (c.stance == Stance::support ? "supports" : "objects");
    for (const auto& [criterion, note] : c.criteria_notes) out << "\n  " << criterion << ": " << note;
    out << '\n';
  }
  return trim(out.str());
}

json topic_refs(const std::vector<Topic>& topics) {
  json arr = json::array();
  for (const auto& t : topics) {
    arr.push_back({{"topic_id", t.topic_id}, {"text", t.text}, {"origin", to_string(t.origin)}});
  }
  return arr;
}

std::string topic_id_of(const json& entry) {
  if (entry.is_string()) return entry.get<std::string>();
  if (entry.is_object() && entry.contains("topic_id") && entry["topic_id"].is_string()) {
    return entry["topic_id"].get<std::string>();
  }
  throw ParseError("entry without a topic_id");
}

RoundRecord run_round(const Taxonomy& taxonomy, const CategoryNode& leaf, const DebateSettings& settings,
                      const DebateBackends& backends, int n, std::vector<TranscriptEntry>& transcripts) {
  RoundRecord rec;
  rec.subcategory_code = leaf.code;
  RoundContext ctx;
  ctx.record_transcripts = settings.save_transcripts;
  try {
    auto t1 = generate_candidates(taxonomy, leaf, Origin::debater_1, n, *backends.debater_1, ctx, 0);
    auto t2 = generate_candidates(taxonomy, leaf, Origin::debater_2, n, *backends.debater_2, ctx, t1.size());
    rec.critiques = cross_critique(taxonomy, leaf, t1, t2, *backends.debater_1, *backends.debater_2, ctx);
    rec.topics = std::move(t1);
    rec.topics.insert(rec.topics.end(), t2.begin(), t2.end());
    rec.verdicts = judge_round(taxonomy, leaf, rec.topics, rec.critiques, *backends.judge, settings.judge_mode, ctx);
  } catch (const BackendError& e) {
    rec = RoundRecord{leaf.code, true, e.what(), {}, {}, {}, ctx.reformat_retries};
  } catch (const ParseError& e) {
    rec = RoundRecord{leaf.code, true, e.what(), {}, {}, {}, ctx.reformat_retries};
  }
  rec.reformat_retries = ctx.reformat_retries;
  transcripts = std::move(ctx.transcripts);
  return rec;
}

std::tuple<std::string, int, std::size_t> dedup_key(const Topic& t) {
  return {t.subcategory_code, debater_number(t.origin), t.generation_index};
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  // Keeps the smaller index as root, so the root is the cluster's earliest member.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::vector<Topic> generate_candidates(const Taxonomy& taxonomy, const CategoryNode& subcategory, Origin debater,
                                       int n, ChatBackend& backend, RoundContext& ctx, std::size_t first_index) {
  if (n < 1) throw ValidationError("generate_candidates requires n >= 1");
  const std::string path = taxonomy.path_label(subcategory.code);
  const json context = {{"task", "generate"},
                        {"subcategory_code", subcategory.code},
                        {"label", subcategory.label},
                        {"path", path},
                        {"debater", debater_number(debater)},
                        {"n", n}};
  const std::string block = round_context_block(context.dump());
  std::vector<ChatMessage> messages = {
      {"system", std::string(kSystemPrompt)},
      {"user", render_prompt("generate", {{"path", path},
                                          {"label", subcategory.label},
                                          {"n", std::to_string(n)},
                                          {"round_context", block}})}};

  auto parse = [&](const std::string& reply) {
    const json doc = parse_model_json(reply);
    if (!doc.contains("topics") || !doc["topics"].is_array()) throw ParseError("reply has no \"topics\" array");
    std::vector<Topic> topics;
    for (const auto& item : doc["topics"]) {
      if (static_cast<int>(topics.size()) == n) break;
      if (!item.is_object() || !item.contains("text") || !item["text"].is_string()) continue;
      std::string text = trim(item["text"].get<std::string>());
      if (text.empty() || utf8_length(text) > kMaxTopicChars || !is_valid_utf8(text)) continue;
      Topic t;
      t.subcategory_code = subcategory.code;
      t.text = std::move(text);
      if (item.contains("explanation") && item["explanation"].is_string()) {
        t.explanation = trim(item["explanation"].get<std::string>());
      }
      t.origin = debater;
      t.generation_index = first_index + topics.size();
      t.topic_id = make_topic_id(subcategory.code, debater, topics.size() + 1);
      topics.push_back(std::move(t));
    }
    if (topics.empty()) throw ParseError("reply contains no usable topic");
    return topics;
  };
  return call_with_reformat(backend, std::move(messages), block, subcategory.code,
                            "generate_" + debater_tag(debater), ctx, parse);
}

namespace {

std::vector<Critique> critique_side(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                    const std::vector<Topic>& targets, Origin critic, ChatBackend& backend,
                                    RoundContext& ctx) {
  if (targets.empty()) return {};
  for (const auto& t : targets) {
    if (t.origin == critic) throw ValidationError("a debater cannot critique its own topic " + t.topic_id);
  }
  const std::string path = taxonomy.path_label(subcategory.code);
  const json context = {{"task", "critique"},
                        {"subcategory_code", subcategory.code},
                        {"label", subcategory.label},
                        {"critic", debater_number(critic)},
                        {"topics", topic_refs(targets)}};
  const std::string block = round_context_block(context.dump());
  std::vector<ChatMessage> messages = {
      {"system", std::string(kSystemPrompt)},
      {"user", render_prompt("critique", {{"path", path},
                                          {"label", subcategory.label},
                                          {"topics", format_topics(targets)},
                                          {"round_context", block}})}};

  auto parse = [&](const std::string& reply) {
    const json doc = parse_model_json(reply);
    if (!doc.contains("critiques") || !doc["critiques"].is_array()) {
      throw ParseError("reply has no \"critiques\" array");
    }
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < targets.size(); ++i) position[targets[i].topic_id] = i;
    std::vector<std::vector<Critique>> by_target(targets.size());
    for (const auto& item : doc["critiques"]) {
      if (!item.is_object()) continue;
      std::string id;
      try {
        id = topic_id_of(item);
      } catch (const ParseError&) {
        continue;
      }
      const auto pos = position.find(id);
      if (pos == position.end()) continue;
      if (!item.contains("stance") || !item["stance"].is_string()) continue;
      Critique c;
      c.critic = critic;
      c.target_topic_id = id;
      try {
        c.stance = stance_from_string(item["stance"].get<std::string>());
      } catch (const ParseError&) {
        continue;
      }
      const json criteria = item.value("criteria", json::object());
      bool complete = criteria.is_object();
      for (const auto& criterion : critique_criteria()) {
        if (!complete) break;
        if (!criteria.contains(criterion) || !criteria[criterion].is_string()) {
          complete = false;
          break;
        }
        c.criteria_notes[criterion] = criteria[criterion].get<std::string>();
      }
      if (!complete) continue;
      by_target[pos->second].push_back(std::move(c));
    }
    std::vector<Critique> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (by_target[i].empty()) throw ParseError("no usable critique for topic " + targets[i].topic_id);
      for (auto& c : by_target[i]) out.push_back(std::move(c));
    }
    return out;
  };
  return call_with_reformat(backend, std::move(messages), block, subcategory.code,
                            "critique_" + debater_tag(critic), ctx, parse);
}

}  // namespace

std::vector<Critique> cross_critique(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                     const std::vector<Topic>& topics_1, const std::vector<Topic>& topics_2,
                                     ChatBackend& backend_1, ChatBackend& backend_2, RoundContext& ctx) {
  auto out = critique_side(taxonomy, subcategory, topics_1, Origin::debater_2, backend_2, ctx);
  auto second = critique_side(taxonomy, subcategory, topics_2, Origin::debater_1, backend_1, ctx);
  out.insert(out.end(), std::make_move_iterator(second.begin()), std::make_move_iterator(second.end()));
  return out;
}

std::vector<JudgeVerdict> judge_round(const Taxonomy& taxonomy, const CategoryNode& subcategory,
                                      const std::vector<Topic>& topics, const std::vector<Critique>& critiques,
                                      ChatBackend& judge, JudgeMode mode, RoundContext& ctx) {
  if (topics.empty()) throw ValidationError("judge_round requires at least one topic");
  const std::string path = taxonomy.path_label(subcategory.code);
  const json context = {{"task", "judge"},
                        {"mode", to_string(mode)},
                        {"subcategory_code", subcategory.code},
                        {"label", subcategory.label},
                        {"topics", topic_refs(topics)}};
  const std::string block = round_context_block(context.dump());
  const char* asset = mode == JudgeMode::reject ? "judge_reject" : "judge_accept";
  std::vector<ChatMessage> messages = {
      {"system", std::string(kSystemPrompt)},
      {"user", render_prompt(asset, {{"path", path},
                                     {"label", subcategory.label},
                                     {"topics", format_topics(topics)},
                                     {"critiques", format_critiques(critiques)},
                                     {"round_context", block}})}};

  auto parse = [&](const std::string& reply) {
    const json doc = parse_model_json(reply);
    const char* key = mode == JudgeMode::reject ? "rejected" : "accepted";
    if (!doc.contains(key) || !doc[key].is_array()) throw ParseError(std::string("reply has no \"") + key + "\" array");
    std::map<std::string, std::string> listed;
    for (const auto& item : doc[key]) {
      std::string reason;
      if (item.is_object() && item.contains("reason") && item["reason"].is_string()) {
        reason = trim(item["reason"].get<std::string>());
      }
      listed.emplace(topic_id_of(item), std::move(reason));
    }
    std::vector<JudgeVerdict> verdicts;
    verdicts.reserve(topics.size());
    for (const auto& t : topics) {
      const auto it = listed.find(t.topic_id);
      JudgeVerdict v{t.topic_id, false, {}};
      if (mode == JudgeMode::reject && it != listed.end()) {
        v.rejected = true;
        v.reason = it->second.empty() ? "rejected by judge" : it->second;
      } else if (mode == JudgeMode::accept && it == listed.end()) {
        v.rejected = true;
        v.reason = "not accepted by judge";
      }
      verdicts.push_back(std::move(v));
    }
    return verdicts;
  };
  return call_with_reformat(judge, std::move(messages), block, subcategory.code, "judge", ctx, parse);
}

std::vector<Topic> apply_retention(RetentionStrategy strategy, const TopicLedger& ledger, int k) {
  if (strategy == RetentionStrategy::keep_fixed_k && k < 1) {
    throw ValidationError("keep_fixed_k requires k >= 1");
  }
  // Every topic of every completed round needs exactly one verdict.
  std::unordered_map<std::string, const JudgeVerdict*> verdict_of;
  for (const auto& [code, round] : ledger.per_subcategory) {
    if (round.failed) continue;
    for (const auto& v : round.verdicts) {
      if (!verdict_of.emplace(v.topic_id, &v).second) {
        throw ConsistencyError("topic " + v.topic_id + " has more than one verdict");
      }
    }
  }
  for (const auto& t : ledger.t_total) {
    if (!verdict_of.count(t.topic_id)) throw ConsistencyError("topic " + t.topic_id + " has no verdict");
  }

  std::vector<Topic> kept;
  switch (strategy) {
    case RetentionStrategy::filter_reject:
      // t_total \ t_reject
      for (const auto& t : ledger.t_total) {
        if (!ledger.t_reject.count(t.topic_id)) kept.push_back(t);
      }
      break;
    case RetentionStrategy::keep_accept:
      for (const auto& t : ledger.t_total) {
        if (!verdict_of.at(t.topic_id)->rejected) kept.push_back(t);
      }
      break;
    case RetentionStrategy::keep_fixed_k: {
      std::map<std::string, std::vector<const Topic*>> accepted;
      for (const auto& t : ledger.t_total) {
        if (!verdict_of.at(t.topic_id)->rejected) accepted[t.subcategory_code].push_back(&t);
      }
      std::set<std::string> chosen;
      for (auto& [code, list] : accepted) {
        std::stable_sort(list.begin(), list.end(),
                         [](const Topic* a, const Topic* b) { return a->generation_index < b->generation_index; });
        const auto take = std::min(list.size(), static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < take; ++i) chosen.insert(list[i]->topic_id);
      }
      for (const auto& t : ledger.t_total) {
        if (chosen.count(t.topic_id)) kept.push_back(t);
      }
      break;
    }
  }
  return kept;
}

std::vector<std::string> topic_shingles(std::string_view text) {
  const auto tokens = tokenize(text);
  std::vector<std::string> shingles;
  if (tokens.empty()) return shingles;
  if (tokens.size() < 3) {
    shingles.push_back(join_tokens(tokens));
    return shingles;
  }
  for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) {
    shingles.push_back(tokens[i] + ' ' + tokens[i + 1] + ' ' + tokens[i + 2]);
  }
  std::sort(shingles.begin(), shingles.end());
  shingles.erase(std::unique(shingles.begin(), shingles.end()), shingles.end());
  return shingles;
}

double shingle_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t inter = 0;
  for (auto i = a.begin(), j = b.begin(); i != a.end() && j != b.end();) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

DedupResult dedup_topics(const std::vector<Topic>& topics, double threshold) {
  std::vector<std::size_t> order(topics.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dedup_key(topics[a]) < dedup_key(topics[b]); });

  // Rank r refers to topics[order[r]].
  std::vector<std::vector<std::string>> shingles(topics.size());
  std::unordered_map<std::string, std::vector<std::size_t>> by_shingle;
  for (std::size_t r = 0; r < order.size(); ++r) {
    shingles[r] = topic_shingles(topics[order[r]].text);
    for (const auto& s : shingles[r]) by_shingle[s].push_back(r);
  }

  UnionFind clusters(order.size());
  std::unordered_map<std::size_t, std::size_t> shared;
  for (std::size_t r = 0; r < order.size(); ++r) {
    shared.clear();
    for (const auto& s : shingles[r]) {
      for (std::size_t q : by_shingle[s]) {
        if (q >= r) break;
        ++shared[q];
      }
    }
    for (const auto& [q, inter] : shared) {
      const std::size_t uni = shingles[r].size() + shingles[q].size() - inter;
      if (static_cast<double>(inter) / static_cast<double>(uni) >= threshold) clusters.unite(q, r);
    }
  }

  std::vector<bool> removed(order.size(), false);
  DedupResult result;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t root = clusters.find(r);
    if (root == r) continue;
    removed[r] = true;
    result.removed.push_back({topics[order[root]].topic_id, topics[order[r]].topic_id,
                              shingle_jaccard(shingles[root], shingles[r])});
  }
  // Keep survivors in their input order.
  std::vector<bool> drop(topics.size(), false);
  for (std::size_t r = 0; r < order.size(); ++r) drop[order[r]] = removed[r];
  for (std::size_t i = 0; i < topics.size(); ++i) {
    if (!drop[i]) result.kept.push_back(topics[i]);
  }
  return result;
}

std::size_t topic_budget(std::size_t full_budget, double scale_factor) {
  if (!(scale_factor > 0.0)) throw ValidationError("scale_factor must be > 0");
  return static_cast<std::size_t>(std::llround(static_cast<double>(full_budget) * scale_factor));
}

int DebateSettings::effective_n() const {
  return std::max(1, static_cast<int>(std::ceil(n_per_debater * scale_factor - 1e-9)));
}

DebateOutcome run_debate_pipeline(const Taxonomy& taxonomy, const DebateSettings& settings,
                                  const DebateBackends& backends) {
  if (settings.n_per_debater < 1) throw ValidationError("n_per_debater must be >= 1");
  if (!(settings.scale_factor > 0.0 && settings.scale_factor <= 4.0)) {
    throw ValidationError("scale_factor must be in (0, 4]");
  }
  if (settings.retention == RetentionStrategy::keep_fixed_k && settings.fixed_k < 1) {
    throw ValidationError("fixed_k must be >= 1");
  }

  DebateOutcome outcome;
  const auto& leaves = taxonomy.subcategories();
  const std::size_t full = settings.full_budget.value_or(leaves.size() * 2 * static_cast<std::size_t>(settings.n_per_debater));
  outcome.budget = topic_budget(full, settings.scale_factor);
  if (leaves.empty()) return outcome;
  if (!backends.debater_1 || !backends.debater_2 || !backends.judge) {
    throw ValidationError("debate needs two debater backends and a judge backend");
  }

  const int n = settings.effective_n();
  const auto max_failures = static_cast<std::size_t>(std::floor(settings.max_failure_fraction * static_cast<double>(leaves.size())));
  std::vector<RoundRecord> rounds(leaves.size());
  std::vector<std::vector<TranscriptEntry>> transcripts(leaves.size());
  std::vector<bool> ran(leaves.size(), false);
  std::atomic<std::size_t> failures{0};
  std::atomic<bool> abort{false};

  parallel_for(leaves.size(), settings.workers, [&](std::size_t i) {
    if (abort.load()) return;
    rounds[i] = run_round(taxonomy, taxonomy.node(leaves[i]), settings, backends, n, transcripts[i]);
    ran[i] = true;
    if (rounds[i].failed && failures.fetch_add(1) + 1 > max_failures) abort.store(true);
  });

  if (abort.load()) {
    std::ostringstream msg;
    msg << "debate aborted: " << failures.load() << " of " << leaves.size()
        << " subcategory rounds failed (limit " << max_failures << ")";
    for (std::size_t i = 0, shown = 0; i < rounds.size() && shown < 3; ++i) {
      if (ran[i] && rounds[i].failed) {
        msg << "; " << rounds[i].subcategory_code << ": " << rounds[i].error;
        ++shown;
      }
    }
    throw AbortedError(msg.str());
  }

  // Commit point: leaf-code order, independent of completion order.
  TopicLedger& ledger = outcome.ledger;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    auto& round = rounds[i];
    if (round.failed) {
      ledger.failed_subcategories.push_back(round.subcategory_code);
    } else {
      for (const auto& t : round.topics) ledger.t_total.push_back(t);
      for (const auto& v : round.verdicts) {
        if (v.rejected) ledger.t_reject.insert(v.topic_id);
      }
    }
    for (auto& e : transcripts[i]) outcome.transcripts.push_back(std::move(e));
    ledger.per_subcategory.emplace(round.subcategory_code, std::move(round));
  }

  ledger.t_retained = apply_retention(settings.retention, ledger, settings.fixed_k);
  auto dedup = dedup_topics(ledger.t_retained, settings.dedup_threshold);
  ledger.dedup_removed = std::move(dedup.removed);

  if (dedup.kept.size() <= outcome.budget) {
    ledger.t_final = std::move(dedup.kept);
  } else {
    // Round-robin over subcategories so the cap thins every leaf evenly.
    std::map<std::string, std::vector<std::size_t>> per_leaf;
    for (std::size_t i = 0; i < dedup.kept.size(); ++i) per_leaf[dedup.kept[i].subcategory_code].push_back(i);
    std::vector<bool> take(dedup.kept.size(), false);
    std::size_t taken = 0;
    for (std::size_t depth = 0; taken < outcome.budget; ++depth) {
      bool any = false;
      for (const auto& [code, idx] : per_leaf) {
        if (depth >= idx.size()) continue;
        any = true;
        if (taken == outcome.budget) break;
        take[idx[depth]] = true;
        ++taken;
      }
      if (!any) break;
    }
    for (std::size_t i = 0; i < dedup.kept.size(); ++i) {
      if (take[i]) {
        ledger.t_final.push_back(std::move(dedup.kept[i]));
      } else {
        ledger.over_budget.push_back(dedup.kept[i].topic_id);
      }
    }
  }
  return outcome;
}

void write_topics_jsonl(const TopicLedger& ledger, const std::filesystem::path& path) {
  std::set<std::string> retained, final_ids, over(ledger.over_budget.begin(), ledger.over_budget.end());
  for (const auto& t : ledger.t_retained) retained.insert(t.topic_id);
  for (const auto& t : ledger.t_final) final_ids.insert(t.topic_id);
  std::map<std::string, std::string> dup_of;
  for (const auto& d : ledger.dedup_removed) dup_of[d.removed_topic_id] = d.kept_topic_id;
  std::unordered_map<std::string, std::string> reject_reason;
  for (const auto& [code, round] : ledger.per_subcategory) {
    for (const auto& v : round.verdicts) {
      if (v.rejected) reject_reason[v.topic_id] = v.reason;
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : ledger.t_total) {
    json line = {{"topic_id", t.topic_id},     {"subcategory_code", t.subcategory_code},
                 {"text", t.text},             {"explanation", t.explanation},
                 {"origin", to_string(t.origin)}};
    if (ledger.t_reject.count(t.topic_id)) {
      line["status"] = "rejected";
      line["reason"] = reject_reason[t.topic_id];
    } else if (!retained.count(t.topic_id)) {
      line["status"] = "not_selected";
      line["reason"] = "beyond the fixed-K selection";
    } else if (const auto d = dup_of.find(t.topic_id); d != dup_of.end()) {
      line["status"] = "dedup_removed";
      line["reason"] = "near-duplicate of " + d->second;
    } else if (over.count(t.topic_id)) {
      line["status"] = "over_budget";
      line["reason"] = "trimmed by the topic budget";
    } else {
      line["status"] = "retained";
    }
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<Topic> read_topics_jsonl(const std::filesystem::path& path, bool only_retained) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Topic> topics;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      if (only_retained && j.at("status").get<std::string>() != "retained") continue;
      Topic t;
      t.topic_id = j.at("topic_id").get<std::string>();
      t.subcategory_code = j.at("subcategory_code").get<std::string>();
      t.text = j.at("text").get<std::string>();
      t.explanation = j.value("explanation", std::string());
      t.origin = origin_from_string(j.at("origin").get<std::string>());
      topics.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return topics;
}

void write_rounds_jsonl(const TopicLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [code, round] : ledger.per_subcategory) {
    json topics = json::array();
    for (const auto& t : round.topics) topics.push_back(t.topic_id);
    json critiques = json::array();
    for (const auto& c : round.critiques) {
      critiques.push_back({{"critic", to_string(c.critic)},
                           {"target_topic_id", c.target_topic_id},
                           {"stance", to_string(c.stance)},
                           {"criteria", c.criteria_notes}});
    }
    json verdicts = json::array();
    for (const auto& v : round.verdicts) {
      json jv = {{"topic_id", v.topic_id}, {"rejected", v.rejected}};
      if (v.rejected) jv["reason"] = v.reason;
      verdicts.push_back(std::move(jv));
    }
    json line = {{"subcategory_code", code},
                 {"status", round.failed ? "failed" : "ok"},
                 {"reformat_retries", round.reformat_retries},
                 {"topics", std::move(topics)},
                 {"critiques", std::move(critiques)},
                 {"verdicts", std::move(verdicts)}};
    if (round.failed) line["error"] = round.error;
    out << line.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_transcripts_jsonl(const std::vector<TranscriptEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TranscriptEntry> read_transcripts_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      entries.push_back(transcript_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace litelong
