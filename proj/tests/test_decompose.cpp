#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "cogs/decompose.hpp"
#include "cogs/prompts.hpp"
#include "cogs/text.hpp"

using namespace cogs;

namespace {

const char* kExemplar1 =
    "(Question: How many times has the satisfied rate been above 25%?) = "
    "(identification: satisfied rate of each year) + (comparison: each instance > "
    "25%) + (count: number of instances where satisfied rate > 25%)";

const char* kExemplar2 =
    "(Question: Is the following statement True or False? Gen X has experienced a "
    "steeper population increase than baby boomers did between 1990 and 2015.) = "
    "(identification: Gen X's population increase curve) + (identification: baby "
    "boomers' increase curve) + (comparison: which one has a steeper curve) + "
    "(fact checking: given the finding from the previous step, is the statement "
    "true?)";

const char* kExemplar3 =
    "(Question: if a multi-college district served 10,000 students, how many "
    "students were determined eligible using EFC criteria?) = (identification: "
    "percentage of students determined eligible using EFC criteria in a "
    "multi-college district) + (calculation: number of students based on that "
    "percentage)";

const char* kExemplar4 =
    "(Question: if the actual Avg ACA Premium in 2017 had turned out to be "
    "$5,000, and the +30% label accurately reflected the difference compared to "
    "the Low Est. projection for that hypothetical $5,000 value, what would be "
    "the implied Avg Individual Mrkt Premium Without ACA - Low Est. - in 2017?) = "
    "(identification: Avg ACA Premium in 2017) + (identification: +30% label that "
    "reflects the difference of Avg ACA Premium in 2017 compared to Low Est.) + "
    "(calculation: implied Low Est. value based on the given 30% difference and "
    "hypothetical $5,000 ACA Premium)";

std::vector<std::string> category_sequence(const std::vector<Factor>& factors) {
  std::vector<std::string> out;
  for (const auto& f : factors) out.push_back(f.category.name);
  return out;
}

// A readable scratch image for prompt-building tests.
struct TempImage {
  std::filesystem::path path;
  TempImage() {
    path = std::filesystem::temp_directory_path() /
           ("cogs_test_img_" + std::to_string(::getpid()) + ".png");
    std::ofstream out(path, std::ios::binary);
    out << "\x89PNG fake image bytes";
  }
  ~TempImage() { std::filesystem::remove(path); }
};

SeedQuestion chart_seed(const std::string& question, const std::string& image) {
  SeedQuestion s;
  s.id = "seed-1";
  s.image_ref = image;
  s.question_text = question;
  s.domain = Domain::Chart;
  return s;
}

}  // namespace

TEST_CASE("category normalization") {
  CHECK(normalize_category_name("Counting") == "count");
  CHECK(normalize_category_name("count") == "count");
  CHECK(normalize_category_name("Fact Checking") == "fact_checking");
  CHECK(normalize_category_name("fact checking") == "fact_checking");
  CHECK(normalize_category_name("Identification") == "identification");
  CHECK(normalize_category_name("COMPARISON") == "comparison");
}

TEST_CASE("category normalization is idempotent") {
  for (const char* raw : {"Counting", "Fact Checking", "identification",
                          "Extrapolation", "weird new type"}) {
    std::string once = normalize_category_name(raw);
    CHECK(normalize_category_name(once) == once);
  }
}

TEST_CASE("known categories get their taxonomy kind") {
  CHECK(make_category("identification").kind == FactorKind::Perception);
  CHECK(make_category("identification").known);
  for (const char* name :
       {"comparison", "count", "calculation", "fact checking", "extrapolation"}) {
    FactorCategory c = make_category(name);
    CHECK(c.kind == FactorKind::Reasoning);
    CHECK(c.known);
  }
}

TEST_CASE("unknown categories are admitted as reasoning") {
  FactorCategory c = make_category("trend analysis");
  CHECK(c.name == "trend_analysis");
  CHECK(c.kind == FactorKind::Reasoning);
  CHECK_FALSE(c.known);
}

TEST_CASE("chart exemplar 1 parses to [identification, comparison, count]") {
  auto factors = parse_decomposition(kExemplar1);
  REQUIRE(factors.size() == 3);
  CHECK(category_sequence(factors) ==
        std::vector<std::string>{"identification", "comparison", "count"});
  CHECK(factors[0].subquestion == "satisfied rate of each year");
  CHECK(factors[1].subquestion == "each instance > 25%");
  CHECK(factors[2].subquestion == "number of instances where satisfied rate > 25%");
}

TEST_CASE("chart exemplar 2 parses to 4 factors with fact_checking") {
  auto factors = parse_decomposition(kExemplar2);
  REQUIRE(factors.size() == 4);
  CHECK(category_sequence(factors) ==
        std::vector<std::string>{"identification", "identification", "comparison",
                                 "fact_checking"});
  CHECK(factors[2].subquestion == "which one has a steeper curve");
}

TEST_CASE("chart exemplars 3 and 4 parse to 2 and 3 factors") {
  auto f3 = parse_decomposition(kExemplar3);
  REQUIRE(f3.size() == 2);
  CHECK(category_sequence(f3) ==
        std::vector<std::string>{"identification", "calculation"});

  auto f4 = parse_decomposition(kExemplar4);
  REQUIRE(f4.size() == 3);
  CHECK(category_sequence(f4) ==
        std::vector<std::string>{"identification", "identification", "calculation"});
}

TEST_CASE("minimal well-formed line") {
  auto factors = parse_decomposition("(Question: q) = (identification: x)");
  REQUIRE(factors.size() == 1);
  CHECK(factors[0].category.name == "identification");
  CHECK(factors[0].subquestion == "x");
}

TEST_CASE("positions follow textual order") {
  auto factors = parse_decomposition(kExemplar2);
  for (std::size_t i = 0; i < factors.size(); ++i)
    CHECK(factors[i].position == static_cast<int>(i));
}

TEST_CASE("subquestions may contain balanced parentheses and punctuation") {
  auto factors = parse_decomposition(
      "(Question: tricky?) = (identification: value of A (millions), in 2019) + "
      "(comparison: (A - B) > 25%, or not)");
  REQUIRE(factors.size() == 2);
  CHECK(factors[0].subquestion == "value of A (millions), in 2019");
  CHECK(factors[1].subquestion == "(A - B) > 25%, or not");
}

TEST_CASE("garbage input raises a positioned ParseError") {
  try {
    parse_decomposition("totally unrelated text with no grammar");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(!e.fragment.empty());
    CHECK(std::string(e.what()).find("at byte") != std::string::npos);
  }
}

TEST_CASE("multi-line responses keep all grammar-valid lines in order") {
  std::string text = std::string("Sure, here you go:\n") + kExemplar1 + "\n" +
                     "not a grammar line\n" + kExemplar3 + "\n";
  auto parsed = parse_decomposition_lines(text);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].factors.size() == 3);
  CHECK(parsed[1].factors.size() == 2);
}

TEST_CASE("serialize-parse round-trip on the exemplars") {
  for (const char* line : {kExemplar1, kExemplar2, kExemplar3, kExemplar4}) {
    auto parsed = parse_decomposition_line(line);
    std::string canon = serialize_decomposition(parsed.question, parsed.factors);
    auto reparsed = parse_decomposition_line(canon);
    CHECK(reparsed.question == parsed.question);
    REQUIRE(reparsed.factors.size() == parsed.factors.size());
    for (std::size_t i = 0; i < parsed.factors.size(); ++i) {
      CHECK(reparsed.factors[i].category.name == parsed.factors[i].category.name);
      CHECK(reparsed.factors[i].subquestion == parsed.factors[i].subquestion);
    }
    CHECK(serialize_decomposition(reparsed.question, reparsed.factors) == canon);
  }
}

TEST_CASE("round-trip property over generated factor lists") {
  std::mt19937_64 rng(20240817);
  const std::vector<std::string> categories = {
      "identification", "comparison",  "count",      "calculation",
      "fact_checking",  "extrapolation", "trend_shift"};
  const std::vector<std::string> words = {
      "revenue", "of",   "retailer", "D",    "in",     "2019",  "vs",
      "baseline", ">",   "25%",      "$5,000", "(net)", "each", "instance"};

  for (int iter = 0; iter < 1200; ++iter) {
    std::size_t n_factors = 1 + text::bounded(rng, 5);
    std::vector<Factor> factors;
    for (std::size_t i = 0; i < n_factors; ++i) {
      Factor f;
      f.category = make_category(categories[text::bounded(rng, categories.size())]);
      std::size_t n_words = 1 + text::bounded(rng, 6);
      std::string sub;
      for (std::size_t w = 0; w < n_words; ++w) {
        if (w) sub += " ";
        sub += words[text::bounded(rng, words.size())];
      }
      f.subquestion = sub;
      f.position = static_cast<int>(i);
      factors.push_back(std::move(f));
    }
    std::string question = "generated question " + std::to_string(iter) + "?";
    std::string canon = serialize_decomposition(question, factors);
    auto parsed = parse_decomposition_line(canon);
    REQUIRE(parsed.factors.size() == factors.size());
    CHECK(parsed.question == question);
    for (std::size_t i = 0; i < factors.size(); ++i) {
      CHECK(parsed.factors[i].category.name == factors[i].category.name);
      CHECK(parsed.factors[i].subquestion == factors[i].subquestion);
      CHECK(parsed.factors[i].position == static_cast<int>(i));
    }
    CHECK(serialize_decomposition(parsed.question, parsed.factors) == canon);
  }
}

TEST_CASE("decomposition prompt ends with the seed question") {
  TempImage img;
  SeedQuestion seed = chart_seed("How many bars exceed 40?", img.path.string());
  ChatRequest req = build_decomposition_prompt(
      seed, {prompts::kChartDecompositionExamples});
  REQUIRE(req.messages.size() == 1);
  const std::string& body = req.messages[0].text;
  std::string expected_tail = "Question: How many bars exceed 40?";
  REQUIRE(body.size() >= expected_tail.size());
  CHECK(body.substr(body.size() - expected_tail.size()) == expected_tail);
  CHECK(req.messages[0].image.has_value());
  CHECK(req.temperature == doctest::Approx(0.0));
}

TEST_CASE("web seeds embed the yes/no exemplar block") {
  TempImage img;
  SeedQuestion seed = chart_seed("Is the cart empty?", img.path.string());
  seed.domain = Domain::WebGUI;
  ChatRequest req =
      build_decomposition_prompt(seed, {prompts::kWebDecompositionExamples});
  CHECK(req.messages[0].text.find("decide yes or no") != std::string::npos);
}

TEST_CASE("empty exemplar list is rejected") {
  TempImage img;
  SeedQuestion seed = chart_seed("q?", img.path.string());
  CHECK_THROWS_AS(build_decomposition_prompt(seed, {}), std::invalid_argument);
}

TEST_CASE("missing image file raises MissingImage") {
  CHECK_THROWS_AS(resolve_image("/no/such/file/anywhere.png"), MissingImage);
}

TEST_CASE("http and data refs pass through untouched") {
  CHECK(resolve_image("http://example/c.png") == "http://example/c.png");
  CHECK(resolve_image("data:image/png;base64,AAAA") == "data:image/png;base64,AAAA");
}

TEST_CASE("local files resolve to base64 data URLs") {
  TempImage img;
  std::string url = resolve_image(img.path.string());
  CHECK(url.rfind("data:image/", 0) == 0);
  CHECK(url.find(";base64,") != std::string::npos);
}

TEST_CASE("decompose extracts factors from a scripted backend") {
  TempImage img;
  SeedQuestion seed = chart_seed(
      "if a multi-college district served 10,000 students, how many students "
      "were determined eligible using EFC criteria?",
      img.path.string());
  auto gw = register_mock({{"multi-college district", kExemplar3, ""}});
  RetryPolicy retry;
  FactorizedQuestion fq = decompose(seed, *gw, retry);
  REQUIRE(fq.factors.size() == 2);
  CHECK(category_sequence(fq.factors) ==
        std::vector<std::string>{"identification", "calculation"});
  CHECK(fq.seed.id == seed.id);
  CHECK(fq.raw_response == kExemplar3);
}

TEST_CASE("decompose retries after an unparseable response") {
  TempImage img;
  SeedQuestion seed = chart_seed("How many bars exceed 40?", img.path.string());
  auto gw = register_mock({{"How many bars", "sorry, cannot help with that", ""},
                           {"How many bars",
                            "(Question: How many bars exceed 40?) = "
                            "(identification: bar heights) + (count: bars above 40)",
                            ""}});
  RetryPolicy retry;
  retry.max_attempts = 2;
  FactorizedQuestion fq = decompose(seed, *gw, retry);
  CHECK(gw->call_count() == 2);
  REQUIRE(fq.factors.size() == 2);
  CHECK(fq.factors[0].category.name == "identification");
}

TEST_CASE("reasoning-only decomposition is rejected") {
  TempImage img;
  SeedQuestion seed = chart_seed("difference between A and B?", img.path.string());
  auto gw = register_mock(
      {{"difference",
        "(Question: difference between A and B?) = (calculation: A - B)", ""},
       {"difference",
        "(Question: difference between A and B?) = (calculation: A - B)", ""},
       {"difference",
        "(Question: difference between A and B?) = (calculation: A - B)", ""}});
  RetryPolicy retry;
  CHECK_THROWS_AS(decompose(seed, *gw, retry), DecompositionFailed);
}

TEST_CASE("persistent gateway failure surfaces as DecompositionFailed") {
  TempImage img;
  SeedQuestion seed = chart_seed("q?", img.path.string());
  auto gw = register_mock({{"q", "", "refusal"}});
  RetryPolicy retry;
  CHECK_THROWS_AS(decompose(seed, *gw, retry), DecompositionFailed);
}
