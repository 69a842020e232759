#include "cogs/reward.hpp"

#include <algorithm>

#include "cogs/prompts.hpp"
#include "cogs/text.hpp"

namespace cogs {

void RewardRequest::check() const {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw LambdaOutOfRange("lambda must be strictly inside (0,1)");
  if (sub_items.empty() && model_kind != RewardModelKind::StandardRM)
    throw std::invalid_argument("process reward models require sub_items");
  if (ground_truth_final.empty())
    throw std::invalid_argument("ground_truth_final empty");
}

std::string extract_final_answer(const std::string& rollout_text) {
  std::string lowered = text::lower(rollout_text);
  const std::string sentinel = "the answer is";
  std::size_t at = lowered.rfind(sentinel);
  if (at != std::string::npos) {
    std::string tail = rollout_text.substr(at + sentinel.size());
    std::size_t stop = tail.find('\n');
    if (stop != std::string::npos) tail = tail.substr(0, stop);
    return text::trim(tail);
  }
  auto lines = text::split_lines(rollout_text);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::string t = text::trim(*it);
    if (!t.empty()) return t;
  }
  return "";
}

namespace {

bool values_match(const std::string& a, const std::string& b,
                  const MatcherConfig& matcher) {
  std::string na = text::normalize_answer(a);
  std::string nb = text::normalize_answer(b);
  if (na.empty() || nb.empty()) return false;
  auto va = text::parse_number(na);
  auto vb = text::parse_number(nb);
  if (va && vb) return text::numbers_match(*va, *vb, matcher.numeric_rel_tol);
  return na == nb;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(text::trim(s.substr(start)));
      break;
    }
    out.push_back(text::trim(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

}  // namespace

int score_final(const std::string& rollout_text, const std::string& ground_truth,
                const MatcherConfig& matcher) {
  if (ground_truth.empty())
    throw std::invalid_argument("score_final: ground truth empty");
  std::string answer = extract_final_answer(rollout_text);
  if (answer.empty()) return 0;
  if (values_match(answer, ground_truth, matcher)) return 1;
  // list answers match element-wise
  auto gt_parts = split_list(ground_truth);
  auto an_parts = split_list(answer);
  if (gt_parts.size() > 1 && gt_parts.size() == an_parts.size()) {
    for (std::size_t i = 0; i < gt_parts.size(); ++i)
      if (!values_match(an_parts[i], gt_parts[i], matcher)) return 0;
    return 1;
  }
  return 0;
}

int judge_subquestion(const std::string& rollout_text, const std::string& subquestion,
                      const std::string& subanswer, JudgeMode mode, Gateway* gateway,
                      const MatcherConfig& matcher, std::string* transcript) {
  if (mode == JudgeMode::LLMJudge) {
    if (!gateway) throw JudgeUnavailable("LLMJudge requires a gateway");
    ChatRequest req;
    ChatMessage msg;
    msg.role = Role::User;
    msg.text = prompts::judge_prompt(rollout_text, subquestion, subanswer);
    req.messages.push_back(std::move(msg));
    req.temperature = 0.0;  // judging wants determinism
    req.request_tag = "judge";
    try {
      ChatResponse resp = gateway->complete(req);
      if (transcript) *transcript = resp.text;
      std::string verdict = text::lower(text::trim(resp.text));
      return verdict.rfind("yes", 0) == 0 ? 1 : 0;
    } catch (const GatewayError&) {
      // judge failure maps to c_i = 0
      if (transcript) *transcript = "<judge unavailable>";
      return 0;
    }
  }
  // DeterministicMatch: the gold sub-answer value must occur in the rollout.
  std::string gold = text::normalize_answer(subanswer);
  if (gold.empty()) return 0;
  if (auto v = text::parse_number(gold)) {
    for (double n : text::extract_numbers(rollout_text))
      if (text::numbers_match(n, *v, matcher.numeric_rel_tol)) return 1;
    return 0;
  }
  return text::lower(rollout_text).find(gold) != std::string::npos ? 1 : 0;
}

double subquestion_hit_rate(const std::vector<int>& c) {
  if (c.empty()) return 0.0;
  double sum = 0;
  for (int v : c) sum += v;
  return sum / static_cast<double>(c.size());
}

double reward(RewardModelKind kind, int r_final, double r_sub, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw LambdaOutOfRange("lambda must be strictly inside (0,1)");
  switch (kind) {
    case RewardModelKind::StandardRM:
      return static_cast<double>(r_final);
    case RewardModelKind::ProcessRM_sum:
      return static_cast<double>(r_final) + lambda * r_sub;
    case RewardModelKind::ProcessRM_max:
      return std::max(static_cast<double>(r_final), lambda * r_sub);
  }
  return 0.0;
}

RewardScore score(const RewardRequest& request, Gateway* gateway) {
  request.check();
  RewardScore out;
  out.r_final = score_final(request.rollout_text, request.ground_truth_final,
                            request.matcher);
  for (const auto& item : request.sub_items) {
    std::string transcript;
    int c = judge_subquestion(request.rollout_text, item.subquestion, item.subanswer,
                              request.judge_mode, gateway, request.matcher,
                              &transcript);
    out.c.push_back(c);
    if (request.judge_mode == JudgeMode::LLMJudge)
      out.judge_transcripts.push_back(std::move(transcript));
  }
  out.r_sub = subquestion_hit_rate(out.c);
  out.reward = reward(request.model_kind, out.r_final, out.r_sub, request.lambda);
  return out;
}

std::vector<BatchItem> score_batch(const std::vector<RewardRequest>& requests,
                                   Gateway* gateway) {
  if (requests.empty()) throw std::invalid_argument("score_batch: empty batch");
  std::vector<BatchItem> out;
  out.reserve(requests.size());
  for (const auto& req : requests) {
    BatchItem item;
    try {
      item.score = score(req, gateway);
    } catch (const std::exception& e) {
      item.error = e.what();
    }
    out.push_back(std::move(item));
  }
  return out;
}

RewardModelKind reward_model_from_name(const std::string& name) {
  std::string n = text::lower(name);
  if (n == "standard" || n == "standardrm") return RewardModelKind::StandardRM;
  if (n == "sum" || n == "processrm-sum") return RewardModelKind::ProcessRM_sum;
  if (n == "max" || n == "processrm-max") return RewardModelKind::ProcessRM_max;
  throw std::invalid_argument("unknown reward model: " + name);
}

const char* reward_model_name(RewardModelKind kind) {
  switch (kind) {
    case RewardModelKind::StandardRM: return "standard";
    case RewardModelKind::ProcessRM_sum: return "sum";
    case RewardModelKind::ProcessRM_max: return "max";
  }
  return "?";
}

JudgeMode judge_mode_from_name(const std::string& name) {
  std::string n = text::lower(name);
  if (n == "deterministic" || n == "deterministicmatch")
    return JudgeMode::DeterministicMatch;
  if (n == "llm" || n == "llmjudge") return JudgeMode::LLMJudge;
  throw std::invalid_argument("unknown judge mode: " + name);
}

}  // namespace cogs
