#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "litelong/mock_backend.hpp"

namespace litelong {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

nlohmann::json to_json(const std::vector<ChatMessage>& messages);

/// A chat-completion model. Implementations must be safe to call from
/// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Returns the assistant message content. Throws BackendError when the
  /// model cannot be reached.
  virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

enum class BackendKind { http_chat, mock };

std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view s);

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::string endpoint_url;  // http_chat only, e.g. http://localhost:8000/v1
  std::string model_name;
  double temperature = 0.7;
  std::int64_t seed = 0;
  int max_in_flight = 4;
  int timeout_ms = 60000;
  int max_retries = 3;
  int backoff_base_ms = 500;  // delay before retry i (1-based) is base * 2^(i-1)
  std::string api_key_env = "LITELONG_API_KEY";
  MockProfile mock;

  /// Throws ValidationError when an invariant does not hold.
  void validate() const;
};

/// Bounds the number of outstanding requests and records the peak, which
/// tests read back to check the bound.
class RequestLimiter {
 public:
  explicit RequestLimiter(int max_in_flight);

  void acquire();
  void release();

  int max_in_flight() const { return max_; }
  int in_flight() const;
  int peak() const { return peak_.load(); }
  std::uint64_t total_requests() const { return total_.load(); }

 private:
  const int max_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  int current_ = 0;
  std::atomic<int> peak_{0};
  std::atomic<std::uint64_t> total_{0};
};

/// Decorator applying a shared RequestLimiter to every call.
class LimitedBackend : public ChatBackend {
 public:
  LimitedBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<RequestLimiter> limiter)
      : inner_(std::move(inner)), limiter_(std::move(limiter)) {}

  std::string complete(const std::vector<ChatMessage>& messages) override;
  const RequestLimiter& limiter() const { return *limiter_; }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<RequestLimiter> limiter_;
};

class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockProfile profile) : profile_(profile) {}
  std::string complete(const std::vector<ChatMessage>& messages) override;
  const MockProfile& profile() const { return profile_; }

 private:
  MockProfile profile_;
};

/// Serves responses from recorded request/response pairs. The lookup key is
/// the exact message list, so a replay only succeeds when prompts are
/// byte-identical to the recording.
class ReplayBackend : public ChatBackend {
 public:
  void add(const std::vector<ChatMessage>& request, std::string response);
  std::string complete(const std::vector<ChatMessage>& messages) override;
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
};

/// Builds the configured backend wrapped in its own limiter.
std::shared_ptr<LimitedBackend> make_backend(const BackendConfig& config);

}  // namespace litelong
