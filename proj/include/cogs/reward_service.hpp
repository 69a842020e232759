#pragma once

#include <memory>
#include <string>

#include "cogs/reward.hpp"

namespace cogs {

// Stateless scoring endpoint: POST /score {items:[...]}, GET /healthz.
// The trainer supplies sub_items per request.
class RewardService {
 public:
  explicit RewardService(Gateway* judge_gateway = nullptr);
  ~RewardService();

  // JSON-in/JSON-out handler body, also used directly by tests and the CLI.
  std::string handle_score(const std::string& request_body) const;

  // Binds and serves on a background thread; returns once the port accepts.
  void start(const std::string& host, int port);
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string reward_request_to_json(const RewardRequest& r);
RewardRequest reward_request_from_json(const std::string& body);

}  // namespace cogs
