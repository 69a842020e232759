#include "cogs/decompose.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "cogs/prompts.hpp"
#include "cogs/text.hpp"

namespace cogs {

std::string normalize_category_name(const std::string& raw) {
  std::string s = text::lower(text::trim(raw));
  std::string out;
  bool in_sep = false;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      if (in_sep && !out.empty()) out.push_back('_');
      in_sep = false;
      out.push_back(c);
    } else {
      in_sep = true;
    }
  }
  if (out == "counting") out = "count";
  if (out == "factchecking") out = "fact_checking";
  if (out == "comparisons") out = "comparison";
  return out;
}

FactorCategory make_category(const std::string& raw) {
  std::string name = normalize_category_name(raw);
  FactorCategory cat;
  cat.name = name;
  if (name == "identification") {
    cat.kind = FactorKind::Perception;
  } else if (name == "comparison" || name == "count" || name == "calculation" ||
             name == "fact_checking" || name == "extrapolation") {
    cat.kind = FactorKind::Reasoning;
  } else {
    cat.kind = FactorKind::Reasoning;
    cat.known = false;
  }
  return cat;
}

namespace {

// Reads a balanced-parenthesis group starting at s[pos] == '('.
// Returns the inner content and advances pos past the closing ')'.
std::string read_group(const std::string& s, std::size_t& pos) {
  if (pos >= s.size() || s[pos] != '(')
    throw ParseError("expected '('", pos, s.substr(pos, 20));
  std::size_t start = ++pos;
  int depth = 1;
  while (pos < s.size()) {
    char c = s[pos];
    if (c == '(') ++depth;
    if (c == ')') {
      --depth;
      if (depth == 0) {
        std::string inner = s.substr(start, pos - start);
        ++pos;
        return inner;
      }
    }
    ++pos;
  }
  throw ParseError("unbalanced parenthesis", start - 1, s.substr(start - 1, 20));
}

void skip_ws(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

}  // namespace

ParsedDecomposition parse_decomposition_line(const std::string& line) {
  std::size_t pos = 0;
  skip_ws(line, pos);
  std::string head = read_group(line, pos);
  std::size_t colon = head.find(':');
  if (colon == std::string::npos ||
      text::lower(text::trim(head.substr(0, colon))) != "question")
    throw ParseError("expected (Question: ...)", 0, head.substr(0, 30));
  ParsedDecomposition out;
  out.question = text::trim(head.substr(colon + 1));

  skip_ws(line, pos);
  if (pos >= line.size() || line[pos] != '=')
    throw ParseError("expected '='", pos, line.substr(pos, 20));
  ++pos;

  int position = 0;
  while (true) {
    skip_ws(line, pos);
    std::size_t group_at = pos;
    std::string body = read_group(line, pos);
    std::size_t c = body.find(':');
    if (c == std::string::npos)
      throw ParseError("factor missing ':'", group_at, body.substr(0, 30));
    Factor f;
    f.category = make_category(body.substr(0, c));
    if (f.category.name.empty())
      throw ParseError("empty category name", group_at, body.substr(0, 30));
    f.subquestion = text::trim(body.substr(c + 1));
    if (f.subquestion.empty())
      throw ParseError("empty subquestion", group_at, body.substr(0, 30));
    f.position = position++;
    out.factors.push_back(std::move(f));

    skip_ws(line, pos);
    if (pos >= line.size()) break;
    if (line[pos] == '+') {
      ++pos;
      continue;
    }
    throw ParseError("expected '+' or end of line", pos, line.substr(pos, 20));
  }
  if (out.factors.empty())
    throw ParseError("no factors", pos, "");
  return out;
}

std::vector<ParsedDecomposition> parse_decomposition_lines(const std::string& text_in) {
  std::vector<ParsedDecomposition> out;
  for (const auto& line : text::split_lines(text_in)) {
    if (line.find('(') == std::string::npos) continue;
    try {
      out.push_back(parse_decomposition_line(line));
    } catch (const ParseError&) {
      // tolerant: non-grammar lines are skipped
    }
  }
  return out;
}

std::vector<Factor> parse_decomposition(const std::string& text_in) {
  auto lines = parse_decomposition_lines(text_in);
  if (lines.empty()) {
    // re-parse the first candidate line to surface a positioned error
    for (const auto& line : text::split_lines(text_in)) {
      if (line.find('(') != std::string::npos) {
        parse_decomposition_line(line);  // throws
      }
    }
    throw ParseError("no decomposition line found", 0, text_in.substr(0, 30));
  }
  return lines.front().factors;
}

std::string serialize_decomposition(const std::string& question,
                                    const std::vector<Factor>& factors) {
  std::ostringstream os;
  os << "(Question: " << text::trim(question) << ") =";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    os << (i == 0 ? " " : " + ");
    os << "(" << factors[i].category.name << ": " << text::trim(factors[i].subquestion)
       << ")";
  }
  return os.str();
}

std::string resolve_image(const std::string& image_ref) {
  if (image_ref.rfind("http://", 0) == 0 || image_ref.rfind("https://", 0) == 0 ||
      image_ref.rfind("data:", 0) == 0)
    return image_ref;
  std::ifstream f(image_ref, std::ios::binary);
  if (!f) throw MissingImage("cannot read image: " + image_ref);
  std::ostringstream buf;
  buf << f.rdbuf();
  std::string mime = "image/png";
  if (image_ref.size() >= 4) {
    auto ext = text::lower(image_ref.substr(image_ref.rfind('.') + 1));
    if (ext == "jpg" || ext == "jpeg") mime = "image/jpeg";
  }
  return "data:" + mime + ";base64," + text::base64_encode(buf.str());
}

ChatRequest build_decomposition_prompt(const SeedQuestion& seed,
                                       const std::vector<std::string>& exemplars) {
  if (exemplars.empty())
    throw std::invalid_argument("build_decomposition_prompt: exemplars empty");
  if (seed.question_text.empty())
    throw std::invalid_argument("build_decomposition_prompt: empty question");
  std::string examples;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i) examples += "\n\n";
    examples += exemplars[i];
  }
  std::string body = prompts::kDecompositionTemplate;
  auto fill = [&body](const std::string& key, const std::string& value) {
    std::size_t at = body.find(key);
    if (at != std::string::npos) body.replace(at, key.size(), value);
  };
  fill("{examples}", examples);
  fill("{query}", seed.question_text);

  ChatMessage msg;
  msg.role = Role::User;
  msg.text = body;
  msg.image = resolve_image(seed.image_ref);

  ChatRequest req;
  req.messages.push_back(std::move(msg));
  req.temperature = 0.0;  // decomposition is a judging-style call
  req.request_tag = "decompose:" + seed.id;
  return req;
}

static bool has_perception(const std::vector<Factor>& factors) {
  for (const auto& f : factors)
    if (f.category.kind == FactorKind::Perception) return true;
  return false;
}

FactorizedQuestion decompose(const SeedQuestion& seed, Gateway& gateway,
                             const RetryPolicy& retry) {
  auto exemplars = seed.domain == Domain::Chart
                       ? std::vector<std::string>{prompts::kChartDecompositionExamples}
                       : std::vector<std::string>{prompts::kWebDecompositionExamples};
  ChatRequest req = build_decomposition_prompt(seed, exemplars);
  std::string last_reason = "no attempts made";
  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    ChatResponse resp;
    try {
      resp = gateway.complete(req);
    } catch (const GatewayError& e) {
      last_reason = e.what();
      break;
    }
    auto lines = parse_decomposition_lines(resp.text);
    if (!lines.empty()) {
      // Multi-line responses: keep the line whose question best matches the seed.
      std::size_t best = 0, best_overlap = 0;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        std::size_t ov = text::token_overlap(lines[i].question, seed.question_text);
        if (ov > best_overlap) {
          best_overlap = ov;
          best = i;
        }
      }
      FactorizedQuestion fq;
      fq.seed = seed;
      fq.factors = std::move(lines[best].factors);
      fq.raw_response = resp.text;
      for (auto& f : fq.factors) f.source_question_id = seed.id;
      if (has_perception(fq.factors)) return fq;
      last_reason = "decomposition has no perception factor";
    } else {
      last_reason = "response did not match the decomposition grammar";
    }
    if (attempt < retry.max_attempts)
      req.messages.back().text += "\n\n" + prompts::kParseRepairSuffix + ".";
  }
  throw DecompositionFailed("decomposition of seed '" + seed.id +
                            "' failed: " + last_reason);
}

}  // namespace cogs
