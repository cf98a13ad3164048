#include "litelong/http_chat_backend.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "litelong/error.hpp"

namespace litelong {
namespace {

using json = nlohmann::json;

// Splits "http://host:8000/v1/" into ("http://host:8000", "/v1").
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint_url needs a scheme: " + url);
  const auto path_begin = url.find('/', scheme_end + 3);
  std::string origin = url.substr(0, path_begin);
  std::string path = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {origin, path};
}

std::string read_content(const std::string& body) {
  const auto envelope = json::parse(body);
  const auto& content = envelope.at("choices").at(0).at("message").at("content");
  if (!content.is_string()) throw std::runtime_error("message content is not a string");
  return content.get<std::string>();
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  config_.validate();
  auto [origin, base] = split_url(config_.endpoint_url);
  origin_ = std::move(origin);
  path_ = base + "/chat/completions";
}

json HttpChatBackend::request_body(const std::vector<ChatMessage>& messages) const {
  return json{{"model", config_.model_name},
              {"messages", to_json(messages)},
              {"temperature", config_.temperature},
              {"seed", config_.seed}};
}

std::string HttpChatBackend::complete(const std::vector<ChatMessage>& messages) {
  const std::string body = request_body(messages).dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      ++retries_;
      const auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(config_.backoff_base_ms) << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    ++attempts_;

    httplib::Client client(origin_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return read_content(res->body);
    } catch (const std::exception& e) {
      last_error = std::string("unreadable response envelope: ") + e.what();
    }
  }
  throw BackendError("chat completion via " + config_.endpoint_url + " failed after " +
                     std::to_string(config_.max_retries + 1) + " attempts (" + last_error + ")");
}

}  // namespace litelong
