#include "litelong/backend.hpp"

#include "litelong/error.hpp"
#include "litelong/http_chat_backend.hpp"

namespace litelong {

nlohmann::json to_json(const std::vector<ChatMessage>& messages) {
  auto out = nlohmann::json::array();
  for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::http_chat ? "http_chat" : "mock"; }

BackendKind backend_kind_from_string(std::string_view s) {
  if (s == "http_chat") return BackendKind::http_chat;
  if (s == "mock") return BackendKind::mock;
  throw ValidationError("unknown backend kind " + std::string(s));
}

void BackendConfig::validate() const {
  if (max_in_flight < 1) throw ValidationError("backend max_in_flight must be >= 1");
  if (timeout_ms <= 0) throw ValidationError("backend timeout_ms must be > 0");
  if (max_retries < 0) throw ValidationError("backend max_retries must be >= 0");
  if (backoff_base_ms < 0) throw ValidationError("backend backoff_base_ms must be >= 0");
  if (kind == BackendKind::http_chat && endpoint_url.empty()) {
    throw ValidationError("http_chat backend needs an endpoint_url");
  }
  if (kind == BackendKind::mock) {
    if (mock.facet_count < 1) throw ValidationError("mock facet_count must be >= 1");
    if (mock.reject_every < 0) throw ValidationError("mock reject_every must be >= 0");
  }
}

RequestLimiter::RequestLimiter(int max_in_flight) : max_(max_in_flight) {
  if (max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
}

void RequestLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return current_ < max_; });
  ++current_;
  ++total_;
  int seen = peak_.load();
  while (current_ > seen && !peak_.compare_exchange_weak(seen, current_)) {
  }
}

void RequestLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --current_;
  }
  cv_.notify_one();
}

int RequestLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::string LimitedBackend::complete(const std::vector<ChatMessage>& messages) {
  struct Slot {
    RequestLimiter& limiter;
    explicit Slot(RequestLimiter& l) : limiter(l) { limiter.acquire(); }
    ~Slot() { limiter.release(); }
  } slot(*limiter_);
  return inner_->complete(messages);
}

std::string MockBackend::complete(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) throw ValidationError("mock backend: empty message list");
  return mock_complete(profile_, messages.back().content);
}

void ReplayBackend::add(const std::vector<ChatMessage>& request, std::string response) {
  responses_[to_json(request).dump()] = std::move(response);
}

std::string ReplayBackend::complete(const std::vector<ChatMessage>& messages) {
  const auto it = responses_.find(to_json(messages).dump());
  if (it == responses_.end()) throw BackendError("replay: no recorded response for this request");
  return it->second;
}

std::shared_ptr<LimitedBackend> make_backend(const BackendConfig& config) {
  config.validate();
  std::shared_ptr<ChatBackend> inner;
  if (config.kind == BackendKind::mock) {
    inner = std::make_shared<MockBackend>(config.mock);
  } else {
    inner = std::make_shared<HttpChatBackend>(config);
  }
  return std::make_shared<LimitedBackend>(std::move(inner),
                                          std::make_shared<RequestLimiter>(config.max_in_flight));
}

}  // namespace litelong
