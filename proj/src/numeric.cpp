#include "finqa/numeric.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace finqa {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::size_t skip_spaces(std::string_view s, std::size_t p) {
  while (p < s.size() && is_space(s[p])) ++p;
  return p;
}

// cpp_int reads a leading 0 as an octal prefix.
BigInt from_digits(std::string_view digits) {
  auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return BigInt(0);
  return BigInt(std::string(digits.substr(first)));
}

BigInt pow10(int n) {
  BigInt r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

struct ScaleSpelling {
  std::string_view word;
  ScaleWord scale;
};

constexpr std::array<ScaleSpelling, 4> kScaleWords{{
    {"thousand", ScaleWord::Thousand},
    {"million", ScaleWord::Million},
    {"billion", ScaleWord::Billion},
    {"trillion", ScaleWord::Trillion},
}};

// Matches a scale word (optionally plural) at p; returns the end offset.
std::optional<std::pair<ScaleWord, std::size_t>> match_scale_word(std::string_view s,
                                                                  std::size_t p) {
  for (const auto& sw : kScaleWords) {
    if (p + sw.word.size() > s.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < sw.word.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(s[p + i])) != sw.word[i]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    std::size_t e = p + sw.word.size();
    if (e < s.size() && (s[e] == 's' || s[e] == 'S')) ++e;
    if (e < s.size() && is_alnum(s[e])) continue;
    return std::pair{sw.scale, e};
  }
  return std::nullopt;
}

// Scans one quantity starting exactly at `start`. Returns nullopt when the
// text at `start` does not begin a well-formed quantity token.
std::optional<Quantity> scan_quantity(std::string_view s, std::size_t start) {
  std::size_t p = start;
  bool paren = false;
  bool currency = false;
  bool negative = false;

  if (p < s.size() && s[p] == '(') {
    paren = true;
    p = skip_spaces(s, p + 1);
  }
  if (p < s.size() && s[p] == '-') {
    negative = true;
    ++p;
  }
  if (p < s.size() && s[p] == '$') {
    currency = true;
    p = skip_spaces(s, p + 1);
  }
  if (!negative && p < s.size() && s[p] == '-') {
    negative = true;
    ++p;
  }

  // Magnitude: digits with optional 3-digit comma groups and a fraction.
  std::string digits;
  int decimals = 0;
  if (p < s.size() && is_digit(s[p])) {
    while (p < s.size() && is_digit(s[p])) digits += s[p++];
    while (p + 3 < s.size() && s[p] == ',' && is_digit(s[p + 1]) && is_digit(s[p + 2]) &&
           is_digit(s[p + 3]) && (p + 4 >= s.size() || !is_digit(s[p + 4]))) {
      digits.append(s.substr(p + 1, 3));
      p += 4;
    }
  } else if (!(p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1]))) {
    return std::nullopt;
  }
  if (p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1])) {
    ++p;
    while (p < s.size() && is_digit(s[p])) {
      digits += s[p++];
      ++decimals;
    }
  }
  if (digits.empty()) return std::nullopt;

  bool percent = false;
  std::size_t q = skip_spaces(s, p);
  if (q < s.size() && s[q] == '%') {
    percent = true;
    p = q + 1;
  }
  if (paren) {
    q = skip_spaces(s, p);
    if (q >= s.size() || s[q] != ')') return std::nullopt;
    p = q + 1;
    negative = !negative;
    if (!percent) {
      q = skip_spaces(s, p);
      if (q < s.size() && s[q] == '%') {
        percent = true;
        p = q + 1;
      }
    }
  }
  if (!percent && p < s.size() && is_alnum(s[p])) {
    // Directly followed by letters: only a glued scale word is acceptable.
    if (auto sw = match_scale_word(s, p); !sw) return std::nullopt;
  }

  std::optional<ScaleWord> scale;
  if (!percent) {
    q = skip_spaces(s, p);
    if (auto sw = match_scale_word(s, q)) {
      scale = sw->first;
      p = sw->second;
    }
  }
  if (p < s.size() && is_alnum(s[p])) return std::nullopt;

  Quantity out;
  out.mantissa = Rational(from_digits(digits), pow10(decimals));
  if (negative) out.mantissa = -out.mantissa;
  out.scale_word = scale;
  out.is_percent = percent;
  out.is_currency = currency;
  out.begin = start;
  out.end = p;
  out.decimals = decimals;
  out.surface_text = std::string(s.substr(start, p - start));
  return out;
}

bool can_start_at(std::string_view s, std::size_t i) {
  if (i == 0) return true;
  char prev = s[i - 1];
  return !is_alnum(prev) && prev != '.';
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string_view scale_word_name(ScaleWord w) {
  for (const auto& sw : kScaleWords)
    if (sw.scale == w) return sw.word;
  return {};
}

std::optional<Quantity> try_parse_quantity(std::string_view text) {
  auto t = trim(text);
  if (t.empty()) return std::nullopt;
  auto q = scan_quantity(t, 0);
  if (!q || q->end != t.size()) return std::nullopt;
  return q;
}

Quantity parse_quantity(std::string_view text) {
  if (auto q = try_parse_quantity(text)) return *q;
  throw NotANumber(std::string(text));
}

std::vector<Quantity> extract_numbers(std::string_view sentence) {
  std::vector<Quantity> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    char c = sentence[i];
    bool candidate = is_digit(c) || c == '(' || c == '$' || c == '-' || c == '.';
    if (candidate && can_start_at(sentence, i)) {
      if (auto q = scan_quantity(sentence, i)) {
        i = q->end;
        out.push_back(std::move(*q));
        continue;
      }
    }
    if (is_alnum(c)) {
      while (i < sentence.size() && is_alnum(sentence[i])) ++i;
      continue;
    }
    ++i;
  }
  return out;
}

std::string render_quantity(const Quantity& q) {
  std::string out;
  Rational m = q.mantissa;
  if (m < 0) {
    out += '-';
    m = -m;
  }
  if (q.is_currency) out += '$';
  out += to_decimal_string(m);
  if (q.is_percent) out += '%';
  if (q.scale_word) {
    out += ' ';
    out += scale_word_name(*q.scale_word);
  }
  return out;
}

bool is_integer(const Rational& r) { return denominator(r) == 1; }

std::string to_decimal_string(const Rational& r, int max_digits) {
  BigInt num = numerator(r);
  BigInt den = denominator(r);
  bool neg = num < 0;
  if (neg) num = -num;

  BigInt d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  int digits;
  BigInt scaled;
  if (d == 1) {
    digits = std::max(twos, fives);
    scaled = num * pow10(digits) / den;
  } else {
    digits = max_digits;
    // round half away from zero
    scaled = (num * pow10(digits) * 2 + den) / (den * 2);
  }
  std::string s = scaled.str();
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (neg && s != "0") s.insert(0, "-");
  return s;
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite value");
  if (v == 0.0) return Rational(0);
  int exp = 0;
  double m = std::frexp(v, &exp);  // v = m * 2^exp, 0.5 <= |m| < 1
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  BigInt n = mant;
  BigInt two_pow = 1;
  two_pow <<= std::abs(exp);
  if (exp >= 0) return Rational(n * two_pow);
  return Rational(n, two_pow);
}

std::optional<Rational> parse_decimal(std::string_view text) {
  auto t = trim(text);
  std::size_t p = 0;
  bool neg = false;
  if (p < t.size() && (t[p] == '-' || t[p] == '+')) {
    neg = t[p] == '-';
    ++p;
  }
  std::string digits;
  int decimals = 0;
  bool seen_dot = false;
  for (; p < t.size(); ++p) {
    if (is_digit(t[p])) {
      digits += t[p];
      if (seen_dot) ++decimals;
    } else if (t[p] == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      return std::nullopt;
    }
  }
  if (digits.empty()) return std::nullopt;
  Rational r(from_digits(digits), pow10(decimals));
  return neg ? Rational(-r) : r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

int decimal_places(std::string_view text) {
  auto t = trim(text);
  auto dot = t.find('.');
  if (dot == std::string_view::npos) return 0;
  int n = 0;
  for (std::size_t i = dot + 1; i < t.size() && is_digit(t[i]); ++i) ++n;
  return n;
}

Rational round_to_decimals(const Rational& r, int decimals) {
  BigInt scale = pow10(decimals);
  Rational x = r * scale;
  BigInt n = numerator(x);
  BigInt d = denominator(x);
  bool neg = n < 0;
  if (neg) n = -n;
  BigInt q = (n * 2 + d) / (d * 2);
  if (neg) q = -q;
  return Rational(q, scale);
}

namespace {

bool close_enough(const Rational& a, const Rational& b, const TolerancePolicy& policy,
                  std::optional<int> b_decimals) {
  if (a == b) return true;
  Rational diff = abs(a - b);
  if (diff <= rational_from_double(policy.abs_tol)) return true;
  Rational denom = std::max({Rational(1), Rational(abs(a)), Rational(abs(b))});
  if (diff / denom <= rational_from_double(policy.rel_tol)) return true;
  if (policy.rounding_clause && b_decimals && *b_decimals >= 0)
    return round_to_decimals(a, *b_decimals) == b;
  return false;
}

}  // namespace

bool values_equal(const Rational& a, const Rational& b, const TolerancePolicy& policy,
                  std::optional<int> b_decimals) {
  if (close_enough(a, b, policy, b_decimals)) return true;
  if (policy.percent_insensitive) {
    return close_enough(a * 100, b, policy, b_decimals) ||
           close_enough(a, b * 100, policy, b_decimals);
  }
  return false;
}

}  // namespace finqa
