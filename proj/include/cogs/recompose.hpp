#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cogs/factor_pool.hpp"
#include "cogs/gateway.hpp"

namespace cogs {

struct SubItem {
  FactorCategory category;
  std::string subquestion;
  std::string subanswer;
};

struct SynthesizedSample {
  std::string image_ref;
  std::string detailed_question;
  std::string concise_question;
  std::string reasoning_trace;   // the step-by-step "Answer" field
  std::string final_answer;
  std::vector<SubItem> sub_items;
  std::string spec_fingerprint;
  bool metadata_used = false;
};

enum class Violation {
  MissingField,
  StepCountMismatch,
  ConciseNotSelfContained,
  AnswerUngrounded,
  DuplicateOfExisting,
  FinalAnswerTooLong,
};

const char* violation_name(Violation v);

struct ValidationReport {
  bool accepted = false;
  std::vector<Violation> violations;
};

struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SynthesisFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ChatRequest build_recomposition_prompt(const RecompositionSpec& spec);

// The spec's factor sequence: perception slots first, then reasoning
// factors expanded by their counts.
std::vector<FactorCategory> spec_factor_sequence(const RecompositionSpec& spec);

// Tolerant extraction of the numbered Question / Concise question / Answer /
// Final Answer records. Records missing a field are dropped; step counts are
// not enforced here (validate() reports them).
std::vector<SynthesizedSample> parse_recomposition(const std::string& response,
                                                   const RecompositionSpec& spec);

using DuplicateProbe =
    std::function<bool(const std::string& image_ref, const std::string& concise_norm)>;

ValidationReport validate(const SynthesizedSample& sample,
                          const RecompositionSpec& spec,
                          const DuplicateProbe& is_duplicate = {});

std::vector<SynthesizedSample> synthesize(const RecompositionSpec& spec,
                                          Gateway& gateway, const RetryPolicy& retry);

}  // namespace cogs
