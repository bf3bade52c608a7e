#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "finqa/dsl.hpp"
#include "finqa/evidence.hpp"
#include "finqa/numeric.hpp"

namespace finqa {

/// Result of one step: a number, or a boolean from `greater`.
class Value {
 public:
  Value() : v_(Rational(0)) {}
  Value(Rational r) : v_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  explicit Value(bool b) : v_(b) {}

  bool is_number() const { return std::holds_alternative<Rational>(v_); }
  bool is_boolean() const { return std::holds_alternative<bool>(v_); }
  const Rational& number() const { return std::get<Rational>(v_); }
  bool boolean() const { return std::get<bool>(v_); }

  /// Decimal text for numbers, "yes"/"no" for booleans.
  std::string to_string(int max_digits = 12) const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  std::variant<Rational, bool> v_;
};

enum class ExecErrorKind {
  DivisionByZero,
  RowNotFound,
  EmptyNumericRow,
  BooleanInArithmetic,
  UngroundedNumber,
  DomainError,
  InvalidProgram,
  UnboundSymbol,
};

std::string_view exec_error_kind_name(ExecErrorKind k);

class ExecError : public std::runtime_error {
 public:
  ExecError(ExecErrorKind kind, std::size_t step, const std::string& message);
  ExecErrorKind kind() const { return kind_; }
  std::size_t step() const { return step_; }

 private:
  ExecErrorKind kind_;
  std::size_t step_;
};

enum class Grounding { Lenient, Strict };

struct ExecOptions {
  Grounding grounding = Grounding::Lenient;
  const ConstantTable* constants = &ConstantTable::defaults();
};

enum class Aggregate { Sum, Average, Max, Min };

/// Results of the steps executed so far, indexed by step number.
class StepEnv {
 public:
  const Value& at(std::size_t n) const { return results_.at(n); }
  std::size_t size() const { return results_.size(); }
  void push(Value v) { results_.push_back(std::move(v)); }
  const std::vector<Value>& results() const { return results_; }

 private:
  std::vector<Value> results_;
};

/// A resolved operand: one number or the numeric cells of one row.
using Resolved = std::variant<Rational, std::vector<Rational>>;

Resolved resolve_argument(const Argument& arg, const EvidenceContext& ctx, const StepEnv& env,
                          const ExecOptions& options = {}, std::vector<std::string>* warnings = nullptr);

/// Numeric cells of a row (name cell excluded, non-numeric cells skipped).
std::vector<Rational> row_numbers(const FinTable::Row& row);

Rational aggregate_row(const std::vector<Rational>& cells, Aggregate kind);

Value eval_step(OpKind op, const std::vector<Resolved>& args, const StepEnv& env);

struct Execution {
  Value answer;
  StepEnv env;
  std::vector<std::string> warnings;
};

/// Runs every step; throws ExecError.
Execution run(const Program& p, const EvidenceContext& ctx, const ExecOptions& options = {});

/// Final step's value.
Value execute(const Program& p, const EvidenceContext& ctx, const ExecOptions& options = {});

/// Exact power; non-integer exponents fall back to double precision.
Rational power(const Rational& base, const Rational& exponent);

}  // namespace finqa
