#include "cogs/gateway.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "cogs/text.hpp"

// httplib pulled in only here; keeps the header cheap to include.
#include <httplib.h>

namespace cogs {

using nlohmann::json;

void ChatRequest::check() const {
  if (messages.empty()) throw std::invalid_argument("ChatRequest: messages empty");
  if (!std::isfinite(temperature) || temperature < 0)
    throw std::invalid_argument("ChatRequest: temperature must be finite and >= 0");
  if (max_tokens <= 0) throw std::invalid_argument("ChatRequest: max_tokens must be > 0");
}

static const char* role_name(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::Assistant: return "assistant";
    default: return "user";
  }
}

std::string ChatRequest::serialize() const {
  json msgs = json::array();
  for (const auto& m : messages) {
    json msg;
    msg["role"] = role_name(m.role);
    if (m.image) {
      json content = json::array();
      content.push_back({{"type", "text"}, {"text", m.text}});
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", *m.image}}}});
      msg["content"] = std::move(content);
    } else {
      msg["content"] = m.text;
    }
    msgs.push_back(std::move(msg));
  }
  json body = {{"model", model_id},
               {"messages", std::move(msgs)},
               {"temperature", temperature},
               {"max_tokens", max_tokens}};
  return body.dump();
}

std::string ChatRequest::prompt_text() const {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out.push_back('\n');
    out += m.text;
  }
  return out;
}

void RetryPolicy::check() const {
  if (max_attempts < 1) throw std::invalid_argument("RetryPolicy: max_attempts < 1");
  if (backoff_factor < 1.0)
    throw std::invalid_argument("RetryPolicy: backoff_factor < 1");
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds{0};
  double ms = static_cast<double>(backoff_base.count()) *
              std::pow(backoff_factor, attempt - 2);
  return std::chrono::milliseconds{static_cast<long long>(ms)};
}

static bool retryable(const RetryPolicy& p, const GatewayError& e) {
  if (dynamic_cast<const TransportError*>(&e)) return p.retry_transport;
  if (dynamic_cast<const RateLimited*>(&e)) return p.retry_rate_limited;
  if (dynamic_cast<const ProtocolError*>(&e)) return p.retry_protocol;
  if (dynamic_cast<const BackendRefusal*>(&e)) return p.retry_refusal;
  return false;
}

ChatResponse complete_with_retry(Gateway& gw, const ChatRequest& request,
                                 const RetryPolicy& policy, const Sleeper& sleep) {
  policy.check();
  request.check();
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    auto delay = policy.delay_before(attempt);
    if (delay.count() > 0) {
      if (sleep)
        sleep(delay);
      else
        std::this_thread::sleep_for(delay);
    }
    try {
      return gw.complete(request);
    } catch (const GatewayError& e) {
      if (!retryable(policy, e)) throw;
      last_error = e.what();
    }
  }
  throw ExhaustedRetries(policy.max_attempts, last_error);
}

MockGateway::MockGateway(std::vector<MockEntry> script) {
  if (script.empty()) throw std::invalid_argument("mock script empty");
  for (auto& e : script) script_.push_back({std::move(e), false});
}

ChatResponse MockGateway::complete(const ChatRequest& request) {
  request.check();
  std::string prompt = request.prompt_text();
  MockEntry entry;
  {
    std::lock_guard lk(mu_);
    ++calls_;
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
    bodies_.push_back(request.serialize());
    bool found = false;
    for (auto& slot : script_) {
      if (!slot.consumed && prompt.find(slot.entry.matcher) != std::string::npos) {
        slot.consumed = true;
        entry = slot.entry;
        found = true;
        break;
      }
    }
    if (!found) {
      --in_flight_;
      throw MockMiss("no unconsumed script entry matches prompt");
    }
  }
  struct Release {
    MockGateway* g;
    ~Release() {
      std::lock_guard lk(g->mu_);
      --g->in_flight_;
    }
  } release{this};

  if (!entry.error.empty()) {
    if (entry.error == "transport") throw TransportError("mock transport failure");
    if (entry.error == "rate_limited") throw RateLimited("mock rate limit");
    if (entry.error == "refusal") throw BackendRefusal("mock refusal");
    if (entry.error == "protocol") throw ProtocolError("mock malformed payload");
    throw TransportError("mock failure: " + entry.error);
  }
  ChatResponse resp;
  resp.text = entry.response;
  resp.backend_id = "mock";
  resp.usage.prompt_tokens = static_cast<long>(prompt.size() / 4);
  resp.usage.completion_tokens = static_cast<long>(entry.response.size() / 4);
  return resp;
}

int MockGateway::call_count() const {
  std::lock_guard lk(mu_);
  return calls_;
}

int MockGateway::peak_concurrency() const {
  std::lock_guard lk(mu_);
  return peak_;
}

std::vector<std::string> MockGateway::seen_request_bodies() const {
  std::lock_guard lk(mu_);
  return bodies_;
}

std::shared_ptr<MockGateway> register_mock(std::vector<MockEntry> script) {
  return std::make_shared<MockGateway>(std::move(script));
}

GatewayConfig GatewayConfig::from_env() { return from_env(GatewayConfig{}); }

GatewayConfig GatewayConfig::from_env(GatewayConfig base) {
  if (const char* v = std::getenv("COGS_LLM_ENDPOINT")) base.endpoint = v;
  if (const char* v = std::getenv("COGS_LLM_KEY")) base.api_key = v;
  if (const char* v = std::getenv("COGS_LLM_MODEL")) base.model_id = v;
  return base;
}

struct HttpGateway::Impl {
  GatewayConfig config;
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;

  explicit Impl(GatewayConfig c) : config(std::move(c)) {}

  void acquire() {
    std::unique_lock lk(mu);
    cv.wait(lk, [&] { return in_flight < config.max_concurrent; });
    ++in_flight;
  }
  void release() {
    {
      std::lock_guard lk(mu);
      --in_flight;
    }
    cv.notify_one();
  }
};

HttpGateway::HttpGateway(GatewayConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
  if (impl_->config.endpoint.empty())
    throw std::invalid_argument("HttpGateway: endpoint not configured");
}

HttpGateway::~HttpGateway() = default;

ChatResponse HttpGateway::complete(const ChatRequest& request) {
  request.check();
  impl_->acquire();
  struct Release {
    Impl* i;
    ~Release() { i->release(); }
  } release{impl_.get()};

  httplib::Client client(impl_->config.endpoint);
  client.set_connection_timeout(impl_->config.timeout.count(), 0);
  client.set_read_timeout(impl_->config.timeout.count(), 0);
  httplib::Headers headers;
  if (!impl_->config.api_key.empty())
    headers.emplace("Authorization", "Bearer " + impl_->config.api_key);

  ChatRequest effective = request;
  if (effective.model_id.empty()) effective.model_id = impl_->config.model_id;

  auto start = std::chrono::steady_clock::now();
  auto res = client.Post("/chat/completions", headers, effective.serialize(),
                         "application/json");
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);

  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429) throw RateLimited("backend returned 429");
  if (res->status < 200 || res->status >= 300)
    throw TransportError("backend returned status " + std::to_string(res->status));

  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw ProtocolError("backend returned invalid JSON");
  try {
    ChatResponse out;
    const auto& choice = body.at("choices").at(0);
    out.text = choice.at("message").at("content").get<std::string>();
    out.backend_id = body.value("model", impl_->config.model_id);
    if (body.contains("usage")) {
      out.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0L);
      out.usage.completion_tokens = body["usage"].value("completion_tokens", 0L);
    }
    out.latency = elapsed;
    if (out.text.empty()) throw BackendRefusal("empty completion");
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace cogs
