#include "cogs/reward_service.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace cogs {

using nlohmann::json;

namespace {

json request_to_json_obj(const RewardRequest& r) {
  json items = json::array();
  for (const auto& it : r.sub_items)
    items.push_back({{"subquestion", it.subquestion}, {"subanswer", it.subanswer}});
  return {{"rollout_text", r.rollout_text},
          {"ground_truth_final", r.ground_truth_final},
          {"sub_items", std::move(items)},
          {"lambda", r.lambda},
          {"model_kind", reward_model_name(r.model_kind)},
          {"judge_mode",
           r.judge_mode == JudgeMode::LLMJudge ? "llm" : "deterministic"}};
}

RewardRequest request_from_json_obj(const json& j) {
  RewardRequest r;
  r.rollout_text = j.at("rollout_text").get<std::string>();
  r.ground_truth_final = j.at("ground_truth_final").get<std::string>();
  for (const auto& it : j.value("sub_items", json::array())) {
    RewardSubItem item;
    item.subquestion = it.value("subquestion", "");
    item.subanswer = it.at("subanswer").get<std::string>();
    r.sub_items.push_back(std::move(item));
  }
  if (!j.contains("lambda"))
    throw std::invalid_argument("lambda is required");  // no silent default
  r.lambda = j.at("lambda").get<double>();
  r.model_kind = reward_model_from_name(j.value("model_kind", "max"));
  r.judge_mode = judge_mode_from_name(j.value("judge_mode", "deterministic"));
  if (j.contains("numeric_rel_tol"))
    r.matcher.numeric_rel_tol = j["numeric_rel_tol"].get<double>();
  return r;
}

json score_to_json_obj(const RewardScore& s) {
  json out = {{"r_final", s.r_final},
              {"c", s.c},
              {"r_sub", s.r_sub},
              {"reward", s.reward}};
  if (!s.judge_transcripts.empty()) out["judge_transcripts"] = s.judge_transcripts;
  return out;
}

}  // namespace

std::string reward_request_to_json(const RewardRequest& r) {
  return request_to_json_obj(r).dump();
}

RewardRequest reward_request_from_json(const std::string& body) {
  return request_from_json_obj(json::parse(body));
}

struct RewardService::Impl {
  Gateway* judge = nullptr;
  httplib::Server server;
  std::thread thread;
  bool started = false;
};

RewardService::RewardService(Gateway* judge_gateway) : impl_(std::make_unique<Impl>()) {
  impl_->judge = judge_gateway;
}

RewardService::~RewardService() { stop(); }

std::string RewardService::handle_score(const std::string& request_body) const {
  json out;
  out["items"] = json::array();
  json body = json::parse(request_body, nullptr, false);
  if (body.is_discarded() || !body.contains("items") || !body["items"].is_array()) {
    out["error"] = "body must be a JSON object with an items array";
    return out.dump();
  }
  // items are isolated: a malformed entry yields an error record, not a
  // failed batch
  for (const auto& item : body["items"]) {
    json result;
    try {
      RewardRequest req = request_from_json_obj(item);
      result = score_to_json_obj(score(req, impl_->judge));
    } catch (const std::exception& e) {
      result = {{"error", e.what()}};
    }
    out["items"].push_back(std::move(result));
  }
  return out.dump();
}

void RewardService::start(const std::string& host, int port) {
  if (impl_->started) return;
  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  impl_->server.Post("/score",
                     [this](const httplib::Request& req, httplib::Response& res) {
                       res.set_content(handle_score(req.body), "application/json");
                     });
  if (!impl_->server.bind_to_port(host, port))
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  impl_->started = true;
}

void RewardService::stop() {
  if (!impl_->started) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->started = false;
}

bool RewardService::running() const { return impl_->started; }

}  // namespace cogs
