#pragma once

#include <string>

namespace cogs::prompts {

// Decomposition instruction; "{examples}" and "{query}" are filled by the
// decomposer, the image is attached as a separate content part.
extern const std::string kDecompositionTemplate;

extern const std::string kChartDecompositionExamples;
extern const std::string kWebDecompositionExamples;

// Re-asked after an unparseable decomposition.
extern const std::string kParseRepairSuffix;

// Recomposition template. Placeholders: {perception_count}, {reasoning_count},
// {structure_counts}, {reasoning_factors}, {factors_block},
// {sampled_concise_questions}, {question_types}.
extern const std::string kRecompositionTemplate;

extern const std::string kRecompositionRelevanceExample;   // in-context example 1
extern const std::string kRecompositionConcisenessExample; // in-context example 2
extern const std::string kRecompositionOutputFormat;       // in-context example 3

// Chain-of-thought preamble prepended to exported training prompts and
// expected in scored rollouts ("The answer is X").
extern const std::string kEvaluationPreamble;

// Judge prompt for LLM-based sub-answer verification; expects YES or NO.
std::string judge_prompt(const std::string& rollout, const std::string& subquestion,
                         const std::string& gold_subanswer);

}  // namespace cogs::prompts
