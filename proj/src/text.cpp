#include "cogs/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace cogs::text {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

static std::string strip_trailing_punct(std::string s) {
  while (!s.empty()) {
    char c = s.back();
    if (c == '.' || c == '?' || c == '!' || c == ',' || c == ';' || c == ':') {
      s.pop_back();
    } else {
      break;
    }
  }
  return s;
}

std::string normalize_question(std::string_view s) {
  return strip_trailing_punct(collapse_ws(lower(s)));
}

std::string normalize_answer(std::string_view s) {
  std::string t = trim(s);
  while (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') ||
                           (t.front() == '\'' && t.back() == '\''))) {
    t = trim(std::string_view(t).substr(1, t.size() - 2));
  }
  return strip_trailing_punct(collapse_ws(lower(t)));
}

std::optional<double> parse_number(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s) {
    if (c == '$' || c == '%' || std::isspace(static_cast<unsigned char>(c)))
      continue;
    stripped.push_back(c);
  }
  // Commas are accepted only as thousands separators ("5,000"); a comma in
  // any other position means this is not a single number (e.g. a list).
  std::string cleaned;
  cleaned.reserve(stripped.size());
  for (std::size_t i = 0; i < stripped.size(); ++i) {
    if (stripped[i] != ',') {
      cleaned.push_back(stripped[i]);
      continue;
    }
    bool three_digits =
        i + 3 < stripped.size() &&
        std::isdigit(static_cast<unsigned char>(stripped[i + 1])) &&
        std::isdigit(static_cast<unsigned char>(stripped[i + 2])) &&
        std::isdigit(static_cast<unsigned char>(stripped[i + 3]));
    bool group_ends = i + 4 >= stripped.size() || stripped[i + 4] == ',' ||
                      stripped[i + 4] == '.';
    if (!three_digits || !group_ends) return std::nullopt;
  }
  if (cleaned.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    double v = std::stod(cleaned, &pos);
    if (pos != cleaned.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::vector<double> extract_numbers(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    bool start = std::isdigit(static_cast<unsigned char>(c)) ||
                 ((c == '-' || c == '+') && i + 1 < s.size() &&
                  std::isdigit(static_cast<unsigned char>(s[i + 1])));
    if (!start) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (s[j] == '-' || s[j] == '+') ++j;
    bool seen_dot = false;
    while (j < s.size()) {
      char d = s[j];
      if (std::isdigit(static_cast<unsigned char>(d))) {
        ++j;
      } else if (d == '.' && !seen_dot && j + 1 < s.size() &&
                 std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
        seen_dot = true;
        ++j;
      } else if (d == ',' && j + 3 < s.size() &&
                 std::isdigit(static_cast<unsigned char>(s[j + 1])) &&
                 std::isdigit(static_cast<unsigned char>(s[j + 2])) &&
                 std::isdigit(static_cast<unsigned char>(s[j + 3]))) {
        j += 4;  // thousands separator
      } else {
        break;
      }
    }
    if (auto v = parse_number(s.substr(i, j - i))) out.push_back(*v);
    i = j;
  }
  return out;
}

bool numbers_match(double a, double b, double rel_tol) {
  if (b == 0.0) return a == 0.0;
  return std::fabs(a - b) / std::fabs(b) <= rel_tol;
}

std::size_t token_overlap(std::string_view a, std::string_view b) {
  auto ta = split_tokens(lower(a));
  auto tb = split_tokens(lower(b));
  std::unordered_set<std::string> sb(tb.begin(), tb.end());
  std::size_t n = 0;
  std::unordered_set<std::string> seen;
  for (auto& t : ta) {
    if (sb.count(t) && seen.insert(t).second) ++n;
  }
  return n;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string base64_encode(std::string_view bytes) {
  static const char* tbl =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out.push_back(tbl[v & 63]);
    i += 3;
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out += "==";
  } else if (rem == 2) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(tbl[(v >> 18) & 63]);
    out.push_back(tbl[(v >> 12) & 63]);
    out.push_back(tbl[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

double unit_real(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace cogs::text
