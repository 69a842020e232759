#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogs {

enum class Role { System, User, Assistant };

struct ChatMessage {
  Role role = Role::User;
  std::string text;
  std::optional<std::string> image;  // URL, data URL, or local path
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::string model_id;
  double temperature = 0.7;
  int max_tokens = 2048;
  std::string request_tag;

  void check() const;              // throws std::invalid_argument
  std::string serialize() const;   // chat-completions JSON body
  std::string prompt_text() const; // concatenated message texts (mock matching)
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::string backend_id;
  Usage usage;
  std::chrono::milliseconds latency{0};
};

struct GatewayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TransportError : GatewayError {
  using GatewayError::GatewayError;
};
struct ProtocolError : GatewayError {
  using GatewayError::GatewayError;
};
struct RateLimited : GatewayError {
  using GatewayError::GatewayError;
};
struct BackendRefusal : GatewayError {
  using GatewayError::GatewayError;
};
struct MockMiss : GatewayError {
  using GatewayError::GatewayError;
};
struct ExhaustedRetries : GatewayError {
  int attempts;
  std::string last_error;
  ExhaustedRetries(int attempts_, std::string last)
      : GatewayError("retries exhausted after " + std::to_string(attempts_) +
                     " attempts: " + last),
        attempts(attempts_),
        last_error(std::move(last)) {}
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  double backoff_factor = 2.0;
  bool retry_transport = true;
  bool retry_rate_limited = true;
  bool retry_protocol = false;
  bool retry_refusal = false;

  void check() const;
  // Delay inserted before attempt `attempt` (1-based; attempt 1 has none).
  std::chrono::milliseconds delay_before(int attempt) const;
};

class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

ChatResponse complete_with_retry(Gateway& gw, const ChatRequest& request,
                                 const RetryPolicy& policy,
                                 const Sleeper& sleep = {});

struct MockEntry {
  std::string matcher;   // substring of the prompt text
  std::string response;
  std::string error;     // "" | transport | rate_limited | refusal | protocol
};

// Scripted backend: complete() consumes matching entries in order,
// unmatched prompts raise MockMiss. Shareable across threads.
class MockGateway : public Gateway {
 public:
  explicit MockGateway(std::vector<MockEntry> script);

  ChatResponse complete(const ChatRequest& request) override;

  int call_count() const;
  int peak_concurrency() const;
  std::vector<std::string> seen_request_bodies() const;

 private:
  struct Slot {
    MockEntry entry;
    bool consumed = false;
  };
  mutable std::mutex mu_;
  std::vector<Slot> script_;
  std::vector<std::string> bodies_;
  int calls_ = 0;
  int in_flight_ = 0;
  int peak_ = 0;
};

std::shared_ptr<MockGateway> register_mock(std::vector<MockEntry> script);

struct GatewayConfig {
  std::string endpoint;   // e.g. http://host:port
  std::string api_key;
  std::string model_id;
  int max_concurrent = 4;
  std::chrono::seconds timeout{120};

  // Env overrides: COGS_LLM_ENDPOINT, COGS_LLM_KEY, COGS_LLM_MODEL.
  static GatewayConfig from_env();
  static GatewayConfig from_env(GatewayConfig base);
};

// POST <endpoint>/chat/completions client with bounded concurrency.
class HttpGateway : public Gateway {
 public:
  explicit HttpGateway(GatewayConfig config);
  ~HttpGateway() override;

  ChatResponse complete(const ChatRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cogs
