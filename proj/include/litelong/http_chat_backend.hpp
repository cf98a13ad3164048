#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "litelong/backend.hpp"

namespace litelong {

/// OpenAI-compatible chat completions client.
///
/// POST {endpoint_url}/chat/completions with
///   {"model", "messages", "temperature", "seed"}
/// and reads choices[0].message.content. A bearer token is taken from the
/// environment variable named by api_key_env when it is set. Non-2xx
/// responses, transport errors and unreadable envelopes are retried up to
/// max_retries times, sleeping backoff_base_ms * 2^(i-1) before retry i (1-based).
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig config);

  std::string complete(const std::vector<ChatMessage>& messages) override;

  /// Request body for a message list; exposed for tests and transcripts.
  nlohmann::json request_body(const std::vector<ChatMessage>& messages) const;

  std::uint64_t attempts() const { return attempts_.load(); }
  std::uint64_t retries() const { return retries_.load(); }

 private:
  BackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // base path + /chat/completions
  std::atomic<std::uint64_t> attempts_{0};
  std::atomic<std::uint64_t> retries_{0};
};

}  // namespace litelong
