#include "litelong/mock_backend.hpp"

#include <nlohmann/json.hpp>

#include "litelong/error.hpp"
#include "litelong/prompts.hpp"

namespace litelong {
namespace {

using json = nlohmann::json;

json debater_topics(const MockProfile& profile, const json& ctx) {
  const std::string label = ctx.at("label").get<std::string>();
  const int debater = ctx.value("debater", 1);
  const int offset = (debater - 1) * profile.facet_count;
  json topics = json::array();
  for (int i = 1; i <= profile.facet_count; ++i) {
    const int facet = offset + i;
    topics.push_back({{"text", label + " — facet " + std::to_string(facet)},
                      {"explanation", "Facet " + std::to_string(facet) + " of " + label +
                                          ", proposed by debater " + std::to_string(debater) + "."}});
  }
  return json{{"topics", std::move(topics)}};
}

json debater_critiques(const json& ctx) {
  const std::string label = ctx.at("label").get<std::string>();
  json critiques = json::array();
  std::size_t index = 0;
  for (const auto& topic : ctx.at("topics")) {
    const std::string text = topic.at("text").get<std::string>();
    const bool support = index % 2 == 0;
    critiques.push_back(
        {{"topic_id", topic.at("topic_id")},
         {"stance", support ? "support" : "object"},
         {"criteria",
          {{"relevance", "\"" + text + "\" is " + (support ? "" : "only loosely ") + "within " + label + "."},
           {"semantic_diversity", support ? "Covers ground the other topics leave open."
                                          : "Overlaps with neighbouring facets."},
           {"complementarity", support ? "Fits the rest of the set." : "Adds little to the set."},
           {"quality", support ? "Clear and retrievable." : "Phrasing is generic."}}}});
    ++index;
  }
  return json{{"critiques", std::move(critiques)}};
}

json judge_decisions(const MockProfile& profile, const json& ctx) {
  const bool accept_mode = ctx.value("mode", std::string("reject")) == "accept";
  json rejected = json::array();
  json accepted = json::array();
  std::size_t arrival = 0;
  for (const auto& topic : ctx.at("topics")) {
    ++arrival;
    const bool reject = profile.reject_every > 0 && arrival % static_cast<std::size_t>(profile.reject_every) == 0;
    if (reject) {
      rejected.push_back({{"topic_id", topic.at("topic_id")}, {"reason", "mock-reject"}});
    } else {
      accepted.push_back({{"topic_id", topic.at("topic_id")}});
    }
  }
  return accept_mode ? json{{"accepted", std::move(accepted)}} : json{{"rejected", std::move(rejected)}};
}

}  // namespace

std::string_view to_string(MockRole role) { return role == MockRole::debater ? "debater" : "judge"; }

std::string mock_complete(const MockProfile& profile, std::string_view prompt) {
  if (profile.facet_count < 1) throw ValidationError("mock facet_count must be >= 1");
  if (profile.reject_every < 0) throw ValidationError("mock reject_every must be >= 0");

  std::string ctx_text;
  if (!extract_round_context(prompt, ctx_text)) {
    throw ValidationError("mock backend: prompt carries no round context");
  }
  json ctx;
  try {
    ctx = json::parse(ctx_text);
    const std::string task = ctx.at("task").get<std::string>();
    if (profile.role == MockRole::debater) {
      if (task == "generate") return debater_topics(profile, ctx).dump();
      if (task == "critique") return debater_critiques(ctx).dump();
    } else if (task == "judge") {
      return judge_decisions(profile, ctx).dump();
    }
    throw ValidationError("mock " + std::string(to_string(profile.role)) + " cannot handle task " + task);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("mock backend: malformed round context: ") + e.what());
  }
}

}  // namespace litelong
