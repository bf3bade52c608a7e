#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace finqa {

/// Exact rational used for every program value.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class ScaleWord { Thousand, Million, Billion, Trillion };

std::string_view scale_word_name(ScaleWord w);

/// A quantity as it was written in a source sentence. The mantissa keeps the
/// written magnitude: "1.5 billion" is 1.5 with scale metadata, never 1.5e9.
struct Quantity {
  std::string surface_text;
  Rational mantissa;
  std::optional<ScaleWord> scale_word;
  bool is_percent = false;
  bool is_currency = false;
  std::size_t begin = 0;  // [begin, end) in the source text
  std::size_t end = 0;
  /// Digits after the decimal point as written ("3.30" -> 2).
  int decimals = 0;
};

class NotANumber : public std::invalid_argument {
 public:
  explicit NotANumber(const std::string& text)
      : std::invalid_argument("not a number: '" + text + "'") {}
};

/// Parses a single quantity token such as "5%", "(23.1)", "$1,500" or
/// "1.5 billion". Throws NotANumber when the whole text is not one quantity.
Quantity parse_quantity(std::string_view text);

/// Non-throwing variant of parse_quantity.
std::optional<Quantity> try_parse_quantity(std::string_view text);

/// All maximal quantity tokens of a sentence, left to right.
std::vector<Quantity> extract_numbers(std::string_view sentence);

/// Renders a quantity back into surface form ("$1500", "(23.1)" is rendered
/// with a leading minus sign, "5%", "1.5 billion").
std::string render_quantity(const Quantity& q);

/// Exact decimal rendering when the denominator has only factors 2 and 5;
/// otherwise an approximation with `max_digits` fractional digits.
std::string to_decimal_string(const Rational& r, int max_digits = 12);

/// Exact conversion of a finite double into a rational.
Rational rational_from_double(double d);

/// Exact parse of a plain decimal ("-12.5", "1e3" is rejected).
std::optional<Rational> parse_decimal(std::string_view text);

double to_double(const Rational& r);

/// Count of fractional digits in a decimal rendering ("11.64" -> 2).
int decimal_places(std::string_view text);

/// Rounds half away from zero to `decimals` fractional digits.
Rational round_to_decimals(const Rational& r, int decimals);

bool is_integer(const Rational& r);

struct TolerancePolicy {
  double abs_tol = 1e-5;
  double rel_tol = 1e-4;
  bool rounding_clause = true;
  /// Accept a == b*100 or a*100 == b under the same tolerances.
  bool percent_insensitive = false;
};

/// Numeric match used by execution accuracy. `b` is the gold reference; its
/// displayed precision drives the rounding clause when `b_decimals` is set.
bool values_equal(const Rational& a, const Rational& b,
                  const TolerancePolicy& policy = {},
                  std::optional<int> b_decimals = std::nullopt);

}  // namespace finqa
