#include "cogs/prompts.hpp"

namespace cogs::prompts {

const std::string kDecompositionTemplate =
    "We can decompose each question into subquestions from one of the general "
    "types.\nHere are some examples:\n\n{examples}\n\nPlease do the same for the "
    "following questions in the same format without explanation.\n\nCheck the "
    "information in the attached image carefully. If the question can be easily "
    "answered with a simple identification step, avoid unnecessary "
    "decomposition.\n\nRemember to strictly follow the format of the example, and "
    "don't provide the answer.\n\nQuestion: {query}";

const std::string kChartDecompositionExamples =
    "(Question: How many times has the satisfied rate been above 25%?) = "
    "(identification: satisfied rate of each year) + (comparison: each instance > "
    "25%) + (count: number of instances where satisfied rate > 25%)\n\n"
    "(Question: Is the following statement True or False? Gen X has experienced a "
    "steeper population increase than baby boomers did between 1990 and 2015.) = "
    "(identification: Gen X's population increase curve) + (identification: baby "
    "boomers' increase curve) + (comparison: which one has a steeper curve) + "
    "(fact checking: given the finding from the previous step, is the statement "
    "true?)\n\n"
    "(Question: if a multi-college district served 10,000 students, how many "
    "students were determined eligible using EFC criteria?) = (identification: "
    "percentage of students determined eligible using EFC criteria in a "
    "multi-college district) + (calculation: number of students based on that "
    "percentage)\n\n"
    "(Question: if the actual Avg ACA Premium in 2017 had turned out to be "
    "$5,000, and the +30% label accurately reflected the difference compared to "
    "the Low Est. projection for that hypothetical $5,000 value, what would be "
    "the implied Avg Individual Mrkt Premium Without ACA - Low Est. - in 2017?) = "
    "(identification: Avg ACA Premium in 2017) + (identification: +30% label that "
    "reflects the difference of Avg ACA Premium in 2017 compared to Low Est.) + "
    "(calculation: implied Low Est. value based on the given 30% difference and "
    "hypothetical $5,000 ACA Premium)";

const std::string kWebDecompositionExamples =
    "(Question: How many times has the satisfied rate been above 25%?) = "
    "(identification: satisfied rate of each year) + (comparison: each instance > "
    "25%) + (count: number of instances where satisfied rate > 25%)\n\n"
    "(Question: Is the following statement yes or no? Gen X has experienced a "
    "steeper population increase than baby boomers did between 1990 and 2015.) = "
    "(identification: Gen X's population increase curve) + (identification: baby "
    "boomers' increase curve) + (comparison: which one has a steeper curve) + "
    "(fact checking: given the finding from the previous step, decide yes or "
    "no)\n\n"
    "(Question: According to this chart, what is the revenue of Retailer D at "
    "Month 6?) = (identification: revenue of Retailer D at Month 6)";

const std::string kParseRepairSuffix =
    "Remember to strictly follow the format of the example";

const std::string kRecompositionRelevanceExample =
    "For example, if the observation subquestion asked about the value of A and "
    "B, and you are asked to generate a calculation subquestion after them, it "
    "must be some calculation between A and B. If there are multiple levels of "
    "reasoning questions, the later reasoning subquestions should be based on the "
    "answers of the previous subquestions. Do not ask irrelevant questions. For "
    "example, if the first subquestion is \"what's the difference between A and "
    "B\", an acceptable next-level reasoning question would be \"what's the "
    "difference between A and B compared to C\". You should avoid an unacceptable "
    "question like \"what's the difference between A and B and what's the "
    "difference between A and C\".";

const std::string kRecompositionConcisenessExample =
    "For example, if the detailed question asks about a new value if A is "
    "changed, the concise question cannot simply refer to a \"new value\" without "
    "mentioning it depends on A being changed. An explicit example: detailed "
    "question: \"What is A, what is B, what is the new value of A+B if A is "
    "changed to 10, what is the difference between the new value and C?\" A bad "
    "concise question is: \"What is the difference between new value and C?\", "
    "because it does not mention A is changed to 10, and it does not mention A+B "
    "is the new value. A correct concise question should be: \"What is the "
    "difference between the new value of A+B and C, if A is changed to 10?\"";

const std::string kRecompositionOutputFormat =
    "{\n"
    "  1: {\n"
    "    \"Question\": \"<Full question with two identifications and one "
    "comparison>\",\n"
    "    \"Concise question\": \"<Concise version of the question>\",\n"
    "    \"Answer\": \"<Step-by-step reasoning and calculation>\",\n"
    "    \"Final Answer\": \"<The final answer to the concise question>\"\n"
    "  },\n"
    "  2: {\n"
    "    \"Question\": \"...\",\n"
    "    \"Concise question\": \"...\",\n"
    "    \"Answer\": \"...\",\n"
    "    \"Final Answer\": \"...\"\n"
    "  },\n"
    "  ...\n"
    "}";

const std::string kRecompositionTemplate =
    "Given the following chart:\n\nchart: <image>\n\nYour Task is to generate 5 "
    "sets of question-answer pairs for instruction tuning. In each set of QA "
    "pairs, you need to first identify {perception_count} entities, and then "
    "compose {reasoning_count} level of reasoning questions related to them. The "
    "2-nd order reasoning questions should be based on the answers of the 1-st "
    "order reasoning questions, and so on.\nEach question must meet ALL these "
    "conditions:\n\n"
    "1. Content Source: Only use data present in the given chart.\n\n"
    "2. Structure: Each question must include exactly {structure_counts}. Each "
    "identification question should ask about one and only one entity/concept, "
    "the following {reasoning_factors} subquestions should be the question "
    "related and only related to the entities/concept mentioned in the previous "
    "subquestions. The specific example of each subquestion type will be provided "
    "in the following text.\n\n"
    "3. Content: Each question must be based on the chart data, and can be "
    "answered using natural language. Avoid asking about the size of an object "
    "that is not relevant to the data (e.g., font size of a label).\n\n"
    "4. Relevance: If there is a reasoning subquestion, it must operate on the "
    "entities or values identified in the observation subquestion. " +
    kRecompositionRelevanceExample +
    "\n\n"
    "5. Conciseness: After writing the detailed question, provide a natural "
    "concise version. This concise version should still look like a question, and "
    "can be asked independently without the previous question. " +
    kRecompositionConcisenessExample +
    "\n\n"
    "6. Answer: Provide a step-by-step reasoning for how you found the "
    "answer.\n\n"
    "7. Final Answer: Provide just the concise final answer to the concise "
    "question, without any explanation or reasoning.\n\n"
    "Reference Examples:\n{factors_block}\n\n"
    "Here are some examples of the concise questions:\n"
    "{sampled_concise_questions}\n\n"
    "Expected Output Format for the generated questions:\nUse the following "
    "structure for each pair:\n\n" +
    kRecompositionOutputFormat +
    "\n\nInstructions:\n\n"
    "1. Follow the example strictly. If the question contains reasoning "
    "subquestions, make sure it is relevant to the observation questions.\n\n"
    "2. Use only the given data in the chart.\n\n"
    "3. Provide exactly 5 unique Q&A pairs. {question_types}\n\n"
    "4. Validate each answer. The answer must be grounded to the data shown in "
    "the chart.\n\n"
    "5. Each pair must include both detailed step-by-step reasoning and the final "
    "result.\n\n"
    "Generate Now:\n\nPlease proceed with generating your 5 question-answer "
    "pairs now.";

const std::string kEvaluationPreamble =
    "You will be given an image and a question that you need to answer based on "
    "the provided image. You need to think step-by-step and format the final "
    "answer in a separate sentence like \"The answer is X\". The final answer "
    "should be in the fewest words possible.";

std::string judge_prompt(const std::string& rollout, const std::string& subquestion,
                         const std::string& gold_subanswer) {
  return "You are verifying a model's chain-of-thought reasoning.\n\n"
         "Subquestion: " + subquestion + "\n"
         "Correct answer to the subquestion: " + gold_subanswer + "\n\n"
         "Model reasoning:\n" + rollout + "\n\n"
         "Did the model's reasoning arrive at the correct answer to this "
         "subquestion? Reply with exactly YES or NO.";
}

}  // namespace cogs::prompts
