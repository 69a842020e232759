#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cogs/gateway.hpp"

namespace cogs {

enum class RewardModelKind { StandardRM, ProcessRM_sum, ProcessRM_max };
enum class JudgeMode { LLMJudge, DeterministicMatch };

struct LambdaOutOfRange : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct JudgeUnavailable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RewardSubItem {
  std::string subquestion;
  std::string subanswer;
};

struct MatcherConfig {
  double numeric_rel_tol = 0.05;
};

struct RewardRequest {
  std::string rollout_text;
  std::string ground_truth_final;
  std::vector<RewardSubItem> sub_items;
  double lambda = 0.5;
  RewardModelKind model_kind = RewardModelKind::ProcessRM_max;
  JudgeMode judge_mode = JudgeMode::DeterministicMatch;
  MatcherConfig matcher;

  void check() const;  // lambda in (0,1); sub_items required unless StandardRM
};

struct RewardScore {
  int r_final = 0;
  std::vector<int> c;
  double r_sub = 0.0;
  double reward = 0.0;
  std::vector<std::string> judge_transcripts;
};

// Answer extracted after "The answer is", falling back to the last line.
std::string extract_final_answer(const std::string& rollout_text);

int score_final(const std::string& rollout_text, const std::string& ground_truth,
                const MatcherConfig& matcher = {});

int judge_subquestion(const std::string& rollout_text, const std::string& subquestion,
                      const std::string& subanswer, JudgeMode mode,
                      Gateway* gateway = nullptr, const MatcherConfig& matcher = {},
                      std::string* transcript = nullptr);

double subquestion_hit_rate(const std::vector<int>& c);

double reward(RewardModelKind kind, int r_final, double r_sub, double lambda);

RewardScore score(const RewardRequest& request, Gateway* gateway = nullptr);

struct BatchItem {
  std::optional<RewardScore> score;
  std::string error;  // non-empty when this item failed
};

std::vector<BatchItem> score_batch(const std::vector<RewardRequest>& requests,
                                   Gateway* gateway = nullptr);

RewardModelKind reward_model_from_name(const std::string& name);
const char* reward_model_name(RewardModelKind kind);
JudgeMode judge_mode_from_name(const std::string& name);

}  // namespace cogs
