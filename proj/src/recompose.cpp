#include "cogs/recompose.hpp"

#include <cctype>
#include <sstream>

#include "cogs/prompts.hpp"
#include "cogs/text.hpp"

namespace cogs {

const char* violation_name(Violation v) {
  switch (v) {
    case Violation::MissingField: return "MissingField";
    case Violation::StepCountMismatch: return "StepCountMismatch";
    case Violation::ConciseNotSelfContained: return "ConciseNotSelfContained";
    case Violation::AnswerUngrounded: return "AnswerUngrounded";
    case Violation::DuplicateOfExisting: return "DuplicateOfExisting";
    case Violation::FinalAnswerTooLong: return "FinalAnswerTooLong";
  }
  return "Unknown";
}

std::vector<FactorCategory> spec_factor_sequence(const RecompositionSpec& spec) {
  std::vector<FactorCategory> seq;
  FactorCategory ident = make_category("identification");
  for (int i = 0; i < spec.perception_count; ++i) seq.push_back(ident);
  for (const auto& rf : spec.reasoning_factors)
    for (int i = 0; i < rf.count; ++i) seq.push_back(rf.category);
  return seq;
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string join_with_and(const std::vector<std::string>& parts) {
  if (parts.size() <= 1) return parts.empty() ? "" : parts[0];
  std::string out;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  out += ", and " + parts.back();
  return out;
}

void fill_all(std::string& body, const std::string& key, const std::string& value) {
  std::size_t at = 0;
  while ((at = body.find(key, at)) != std::string::npos) {
    body.replace(at, key.size(), value);
    at += value.size();
  }
}

// {lowercase_token} left in the rendered prompt means an unfilled placeholder.
bool has_unfilled_placeholder(const std::string& body) {
  for (std::size_t i = 0; i + 1 < body.size(); ++i) {
    if (body[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < body.size() &&
           (std::islower(static_cast<unsigned char>(body[j])) || body[j] == '_'))
      ++j;
    if (j > i + 1 && j < body.size() && body[j] == '}') return true;
  }
  return false;
}

}  // namespace

ChatRequest build_recomposition_prompt(const RecompositionSpec& spec) {
  if (spec.perception_count < 1)
    throw TemplateError("spec requires at least one perception factor");
  if (spec.perception_exemplars.empty())
    throw TemplateError("spec has no perception exemplars");
  int reasoning_total = 0;
  for (const auto& rf : spec.reasoning_factors) {
    if (rf.exemplars.empty())
      throw TemplateError("factor '" + rf.category.name + "' has no exemplars");
    reasoning_total += rf.count;
  }

  // The template says "exactly {structure_counts}", so the first part reads
  // "exactly N identification"; repeat "exactly" for the remaining parts.
  std::vector<std::string> structure;
  structure.push_back(std::to_string(spec.perception_count) + " identification");
  std::vector<std::string> reasoning_names;
  for (const auto& rf : spec.reasoning_factors) {
    structure.push_back("exactly " + std::to_string(rf.count) + " " +
                        rf.category.name);
    reasoning_names.push_back(rf.category.name);
  }

  std::ostringstream factors_block;
  factors_block << "identification: " << join(spec.perception_exemplars, "; ");
  for (const auto& rf : spec.reasoning_factors)
    factors_block << "\n" << rf.category.name << ": " << join(rf.exemplars, "; ");

  std::string question_types;
  for (const auto& rf : spec.reasoning_factors) {
    if (rf.category.name == "fact_checking" || rf.category.name == "extrapolation") {
      question_types =
          "Hypothetical and fact-checking question styles are allowed when the "
          "required factors call for them.";
      break;
    }
  }

  std::string body = prompts::kRecompositionTemplate;
  fill_all(body, "{perception_count}", std::to_string(spec.perception_count));
  fill_all(body, "{reasoning_count}", std::to_string(reasoning_total));
  fill_all(body, "{structure_counts}", join_with_and(structure));
  fill_all(body, "{reasoning_factors}", join(reasoning_names, ", ") + " ");
  fill_all(body, "{factors_block}", factors_block.str());
  fill_all(body, "{sampled_concise_questions}", join(spec.concise_examples, "\n"));
  fill_all(body, "{question_types}", question_types);
  if (spec.metadata)
    body += "\n\nUnderlying data table for the chart:\n" + *spec.metadata;
  if (has_unfilled_placeholder(body))
    throw TemplateError("recomposition prompt has unfilled placeholders");

  ChatMessage msg;
  msg.role = Role::User;
  msg.text = body;
  msg.image = resolve_image(spec.image_ref);

  ChatRequest req;
  req.messages.push_back(std::move(msg));
  req.temperature = 0.7;  // synthesis wants diversity
  req.request_tag = "recompose:" + spec.fingerprint();
  return req;
}

namespace {

enum class Key { Question, Concise, Answer, Final, None };

struct KeyHit {
  Key key = Key::None;
  std::size_t start = 0;      // key start
  std::size_t value_at = 0;   // first char after ':'
};

bool matches_at(const std::string& s, std::size_t i, const char* word) {
  std::size_t n = std::char_traits<char>::length(word);
  if (i + n > s.size()) return false;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::tolower(static_cast<unsigned char>(s[i + k])) !=
        std::tolower(static_cast<unsigned char>(word[k])))
      return false;
  }
  return true;
}

// Finds the next record key at or after `from`, requiring a key position:
// optionally quoted, then optional whitespace, then ':'.
KeyHit next_key(const std::string& s, std::size_t from) {
  for (std::size_t i = from; i < s.size(); ++i) {
    Key key = Key::None;
    std::size_t len = 0;
    if (matches_at(s, i, "Concise question")) {
      key = Key::Concise;
      len = 16;
    } else if (matches_at(s, i, "Final Answer")) {
      key = Key::Final;
      len = 12;
    } else if (matches_at(s, i, "Question")) {
      key = Key::Question;
      len = 8;
    } else if (matches_at(s, i, "Answer")) {
      key = Key::Answer;
      len = 6;
    }
    if (key == Key::None) continue;
    if (i > 0) {
      char prev = s[i - 1];
      if (std::isalnum(static_cast<unsigned char>(prev))) continue;
      bool quoted_prev = prev == '"' || prev == '\'';
      std::size_t j = i + len;
      if (quoted_prev) {
        if (j >= s.size() || s[j] != prev) continue;
        ++j;
      }
      while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
      if (j >= s.size() || s[j] != ':') continue;
      KeyHit hit;
      hit.key = key;
      hit.start = i;
      hit.value_at = j + 1;
      return hit;
    }
  }
  return {};
}

// Value after a key: quoted string (either quote style, backslash escapes)
// or bare text up to end of line.
std::string read_value(const std::string& s, std::size_t at, std::size_t& end) {
  std::size_t i = at;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
    char q = s[i++];
    std::string out;
    while (i < s.size()) {
      char c = s[i];
      if (c == '\\' && i + 1 < s.size()) {
        char n = s[i + 1];
        if (n == 'n')
          out.push_back('\n');
        else
          out.push_back(n);
        i += 2;
        continue;
      }
      if (c == q) {
        ++i;
        break;
      }
      out.push_back(c);
      ++i;
    }
    end = i;
    return out;
  }
  std::size_t nl = s.find('\n', i);
  if (nl == std::string::npos) nl = s.size();
  std::string out = text::trim(s.substr(i, nl - i));
  while (!out.empty() && (out.back() == ',' || out.back() == '}')) out.pop_back();
  end = nl;
  return text::trim(out);
}

std::string strip_code_fences(const std::string& s) {
  std::string out;
  for (const auto& line : text::split_lines(s)) {
    if (text::trim(line).rfind("```", 0) == 0) continue;
    out += line;
    out.push_back('\n');
  }
  return out;
}

// Concluding value of a reasoning step: text after the last '=', else after
// the last " is ", else the whole step.
std::string step_conclusion(const std::string& step) {
  std::string body = text::trim(step);
  std::size_t eq = body.rfind('=');
  if (eq != std::string::npos) {
    body = body.substr(eq + 1);
  } else {
    std::size_t is_at = text::lower(body).rfind(" is ");
    if (is_at != std::string::npos) body = body.substr(is_at + 4);
  }
  body = text::trim(body);
  while (!body.empty() && body.back() == '.') body.pop_back();
  return text::trim(body);
}

// Splits an Answer field on "Step <k>:" markers; returns step bodies in order.
std::vector<std::string> split_steps(const std::string& answer) {
  std::vector<std::size_t> starts;
  std::vector<std::size_t> body_at;
  for (std::size_t i = 0; i + 4 < answer.size(); ++i) {
    if (!matches_at(answer, i, "Step")) continue;
    if (i > 0 && std::isalnum(static_cast<unsigned char>(answer[i - 1]))) continue;
    std::size_t j = i + 4;
    while (j < answer.size() && answer[j] == ' ') ++j;
    std::size_t digits = j;
    while (j < answer.size() && std::isdigit(static_cast<unsigned char>(answer[j])))
      ++j;
    if (j == digits || j >= answer.size() || answer[j] != ':') continue;
    starts.push_back(i);
    body_at.push_back(j + 1);
  }
  std::vector<std::string> steps;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    std::size_t end = k + 1 < starts.size() ? starts[k + 1] : answer.size();
    steps.push_back(text::trim(answer.substr(body_at[k], end - body_at[k])));
  }
  return steps;
}

// The per-factor question named in a step, when the step contains one.
std::string embedded_question(const std::string& step) {
  std::size_t qm = step.find('?');
  if (qm == std::string::npos) return "";
  std::size_t start = 0;
  for (std::size_t i = qm; i > 0; --i) {
    char c = step[i - 1];
    if (c == '.' || c == ':' || c == '"' || c == '\n') {
      start = i;
      break;
    }
  }
  return text::trim(step.substr(start, qm - start + 1));
}

}  // namespace

std::vector<SynthesizedSample> parse_recomposition(const std::string& response,
                                                   const RecompositionSpec& spec) {
  std::string body = strip_code_fences(response);
  auto seq = spec_factor_sequence(spec);

  struct Raw {
    std::string question, concise, answer, final_answer;
  };
  std::vector<Raw> raws;
  Raw cur;
  bool open = false;
  std::size_t pos = 0;
  while (true) {
    KeyHit hit = next_key(body, pos);
    if (hit.key == Key::None) break;
    std::size_t end = hit.value_at;
    std::string value = read_value(body, hit.value_at, end);
    pos = end;
    switch (hit.key) {
      case Key::Question:
        if (open) raws.push_back(cur);
        cur = Raw{};
        cur.question = value;
        open = true;
        break;
      case Key::Concise:
        cur.concise = value;
        break;
      case Key::Answer:
        cur.answer = value;
        break;
      case Key::Final:
        cur.final_answer = value;
        break;
      default:
        break;
    }
  }
  if (open) raws.push_back(cur);

  std::vector<SynthesizedSample> out;
  for (const auto& raw : raws) {
    if (static_cast<int>(out.size()) >= spec.pairs_requested) break;
    if (raw.question.empty() || raw.concise.empty() || raw.answer.empty() ||
        raw.final_answer.empty())
      continue;  // MissingField: record dropped, others kept
    SynthesizedSample s;
    s.image_ref = spec.image_ref;
    s.detailed_question = raw.question;
    s.concise_question = raw.concise;
    s.reasoning_trace = raw.answer;
    s.final_answer = raw.final_answer;
    s.spec_fingerprint = spec.fingerprint();
    s.metadata_used = spec.metadata.has_value();

    auto steps = split_steps(raw.answer);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      SubItem item;
      item.category = k < seq.size() ? seq[k] : seq.back();
      std::string q = embedded_question(steps[k]);
      item.subquestion =
          q.empty() ? item.category.name + " step " + std::to_string(k + 1) : q;
      item.subanswer = step_conclusion(steps[k]);
      s.sub_items.push_back(std::move(item));
    }
    out.push_back(std::move(s));
  }
  return out;
}

ValidationReport validate(const SynthesizedSample& sample,
                          const RecompositionSpec& spec,
                          const DuplicateProbe& is_duplicate) {
  ValidationReport report;
  auto flag = [&report](Violation v) { report.violations.push_back(v); };

  if (sample.detailed_question.empty() || sample.concise_question.empty() ||
      sample.reasoning_trace.empty() || sample.final_answer.empty())
    flag(Violation::MissingField);
  for (const auto& item : sample.sub_items)
    if (item.subanswer.empty()) {
      flag(Violation::MissingField);
      break;
    }

  if (text::split_tokens(sample.final_answer).size() > 10)
    flag(Violation::FinalAnswerTooLong);

  if (static_cast<int>(sample.sub_items.size()) != spec.total_factors())
    flag(Violation::StepCountMismatch);

  // Hypothetical premises in the detailed question must survive into the
  // concise question.
  {
    std::string detailed = " " + text::lower(sample.detailed_question) + " ";
    std::string concise = " " + text::lower(sample.concise_question) + " ";
    static const char* markers[] = {" if ", " changed to "};
    for (const char* m : markers) {
      if (detailed.find(m) != std::string::npos &&
          concise.find(m) == std::string::npos) {
        flag(Violation::ConciseNotSelfContained);
        break;
      }
    }
  }

  // Numeric grounding: a numeric final answer must appear among the numbers
  // in the reasoning trace.
  if (auto v = text::parse_number(text::normalize_answer(sample.final_answer))) {
    bool grounded = false;
    for (double n : text::extract_numbers(sample.reasoning_trace)) {
      if (text::numbers_match(n, *v, 0.05)) {
        grounded = true;
        break;
      }
    }
    if (!grounded) flag(Violation::AnswerUngrounded);
  }

  if (is_duplicate &&
      is_duplicate(sample.image_ref, text::normalize_question(sample.concise_question)))
    flag(Violation::DuplicateOfExisting);

  report.accepted = report.violations.empty();
  return report;
}

std::vector<SynthesizedSample> synthesize(const RecompositionSpec& spec,
                                          Gateway& gateway,
                                          const RetryPolicy& retry) {
  ChatRequest req = build_recomposition_prompt(spec);
  std::string last_reason = "no attempts made";
  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    ChatResponse resp;
    try {
      resp = gateway.complete(req);
    } catch (const GatewayError& e) {
      last_reason = e.what();
      break;
    }
    auto candidates = parse_recomposition(resp.text, spec);
    std::vector<SynthesizedSample> accepted;
    for (const auto& c : candidates)
      if (validate(c, spec).accepted) accepted.push_back(c);
    if (!accepted.empty()) return accepted;
    last_reason = candidates.empty() ? "no parseable records in response"
                                     : "all records rejected by validator";
    if (attempt < retry.max_attempts)
      req.messages.back().text += "\n\n" + prompts::kParseRepairSuffix + ".";
  }
  throw SynthesisFailed("synthesis for image '" + spec.image_ref +
                        "' failed: " + last_reason);
}

}  // namespace cogs
