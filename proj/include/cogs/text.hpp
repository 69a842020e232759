#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cogs::text {

std::string trim(std::string_view s);
std::string lower(std::string_view s);
std::string collapse_ws(std::string_view s);
std::vector<std::string> split_tokens(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

// lowercase, whitespace collapse, trailing punctuation strip
std::string normalize_question(std::string_view s);

// lowercase, strip surrounding whitespace/quotes and trailing punctuation
std::string normalize_answer(std::string_view s);

// Parses "23.7%", "$5,000", "-1.2e3" and plain numbers.
std::optional<double> parse_number(std::string_view s);

// All numeric literals appearing in a free-text blob, in order.
std::vector<double> extract_numbers(std::string_view s);

// Relative-tolerance numeric match; exact for zero reference.
bool numbers_match(double a, double b, double rel_tol);

std::size_t token_overlap(std::string_view a, std::string_view b);

std::uint64_t fnv1a(std::string_view s);

std::string base64_encode(std::string_view bytes);

// Unbiased-enough bounded draw; modulo bias over 64 bits is negligible
// and keeps the stream identical across standard library versions.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n);
double unit_real(std::mt19937_64& rng);

}  // namespace cogs::text
