#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogs/gateway.hpp"

namespace cogs {

enum class Domain { Chart, WebGUI };
enum class FactorKind { Perception, Reasoning };

struct SeedQuestion {
  std::string id;
  std::string image_ref;
  std::string question_text;
  Domain domain = Domain::Chart;
  std::optional<std::string> metadata_ref;
};

struct FactorCategory {
  std::string name;                     // normalized [a-z_]+ token
  FactorKind kind = FactorKind::Reasoning;
  bool known = true;                    // false for discovered categories

  bool operator==(const FactorCategory& o) const { return name == o.name; }
};

struct Factor {
  FactorCategory category;
  std::string subquestion;
  std::string source_question_id;
  int position = 0;
};

struct FactorizedQuestion {
  SeedQuestion seed;
  std::vector<Factor> factors;
  std::string raw_response;
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  std::string fragment;
  ParseError(const std::string& msg, std::size_t offset_, std::string fragment_)
      : std::runtime_error(msg + " at byte " + std::to_string(offset_) + " near '" +
                           fragment_ + "'"),
        offset(offset_),
        fragment(std::move(fragment_)) {}
};

struct DecompositionFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingImage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "Fact Checking" -> "fact_checking", "Counting" -> "count", etc. Idempotent.
std::string normalize_category_name(const std::string& raw);

// Known names get their seed-taxonomy kind; unknown names are admitted as
// Reasoning with known = false.
FactorCategory make_category(const std::string& raw);

struct ParsedDecomposition {
  std::string question;
  std::vector<Factor> factors;
};

// One grammar line: (Question: q) = (cat: sub) [+ (cat: sub)]*
ParsedDecomposition parse_decomposition_line(const std::string& line);

// All grammar-valid lines in a response, in textual order.
std::vector<ParsedDecomposition> parse_decomposition_lines(const std::string& text);

// Factors of the first grammar-valid line; throws ParseError when none parse.
std::vector<Factor> parse_decomposition(const std::string& text);

// Canonical textual form; parse(serialize(x)) round-trips.
std::string serialize_decomposition(const std::string& question,
                                    const std::vector<Factor>& factors);

// Resolves image_ref to an attachable URL (pass-through for http/data,
// base64 data URL for local files). Throws MissingImage.
std::string resolve_image(const std::string& image_ref);

ChatRequest build_decomposition_prompt(const SeedQuestion& seed,
                                       const std::vector<std::string>& exemplars);

FactorizedQuestion decompose(const SeedQuestion& seed, Gateway& gateway,
                             const RetryPolicy& retry);

}  // namespace cogs
