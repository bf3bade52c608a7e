#pragma once

// Reasoning-program representation, concrete syntax, and validation.
//
// Concrete syntax (see docs/grammar.md):
//
//   divide(9413, 100), divide(8249, 100), subtract(#0, #1)
//
// Steps are separated by commas; #n names the result of step n (0-based).

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "finqa/evidence.hpp"
#include "finqa/numeric.hpp"

namespace finqa {

enum class OpKind {
  Add,
  Subtract,
  Multiply,
  Divide,
  Exp,
  Greater,
  TableSum,
  TableAverage,
  TableMax,
  TableMin,
};

inline constexpr std::size_t kOpCount = 10;
inline constexpr OpKind kAllOps[kOpCount] = {
    OpKind::Add,      OpKind::Subtract,     OpKind::Multiply, OpKind::Divide,
    OpKind::Exp,      OpKind::Greater,      OpKind::TableSum, OpKind::TableAverage,
    OpKind::TableMax, OpKind::TableMin,
};

std::string_view op_name(OpKind op);
/// Accepts hyphenated names and the underscore spelling ("table_sum").
std::optional<OpKind> op_from_name(std::string_view name);
bool is_table_op(OpKind op);
std::size_t op_arity(OpKind op);

/// Named numeric constants usable as program arguments.
class ConstantTable {
 public:
  struct Entry {
    std::string name;
    Rational value;
  };

  ConstantTable() = default;
  explicit ConstantTable(std::vector<Entry> entries, bool accept_systematic = false);

  /// const_1..5, const_10, const_100, const_1000, const_1000000, const_m1.
  static const ConstantTable& defaults();
  /// Defaults plus any `const_<digits>` / `const_m<digits>` spelling.
  static const ConstantTable& permissive();

  std::optional<Rational> lookup(std::string_view name) const;
  /// First configured name whose value equals `v`.
  std::optional<std::string> name_for(const Rational& v) const;
  const std::vector<Entry>& entries() const { return entries_; }
  bool accepts_systematic() const { return accept_systematic_; }

 private:
  std::vector<Entry> entries_;
  bool accept_systematic_ = false;
};

struct NumberLiteral {
  Rational value;
  friend bool operator==(const NumberLiteral&, const NumberLiteral&) = default;
};
struct Constant {
  std::string name;
  Rational value;
  friend bool operator==(const Constant&, const Constant&) = default;
};
struct RowName {
  std::string name;
  friend bool operator==(const RowName&, const RowName&) = default;
};
struct StepRef {
  std::size_t index = 0;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};
/// Free symbol, only produced when parsing in symbolic mode ("a_1").
struct Symbol {
  std::string name;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Argument = std::variant<NumberLiteral, Constant, RowName, StepRef, Symbol>;

struct OperationStep {
  OpKind op = OpKind::Add;
  std::vector<Argument> args;
  friend bool operator==(const OperationStep&, const OperationStep&) = default;
};

struct Program {
  std::vector<OperationStep> steps;
  friend bool operator==(const Program&, const Program&) = default;
};

enum class ParseErrorKind { Syntax, Arity, UnknownOperation, ForwardStepRef, UnknownConstant };

std::string_view parse_error_kind_name(ParseErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t position, std::string message);

  ParseErrorKind kind() const { return kind_; }
  /// Byte offset into the program text.
  std::size_t position() const { return position_; }

 private:
  ParseErrorKind kind_;
  std::size_t position_;
};

struct ParseOptions {
  const ConstantTable* constants = &ConstantTable::defaults();
  /// Bare identifiers in math-argument position become Symbol arguments.
  bool symbolic = false;
  /// Accepts the public release spelling of table operations, which carries a
  /// second "none" argument: table_sum(<row>, none).
  bool release_syntax = false;
};

/// Parses and structurally checks a program; throws ParseError.
Program parse_program(std::string_view text, const ParseOptions& options = {});

/// Grammar-only parse: arity, forward references and argument kinds are left
/// for validate() to report.
Program parse_program_syntax(std::string_view text, const ParseOptions& options = {});

/// Rewrites release-spelling table steps, table_sum(<row>, none), into the
/// one-argument form. Row names that were split at commas are rejoined.
/// Returns the number of rewritten steps.
std::size_t strip_release_none(Program& p);

std::string render_argument(const Argument& arg);
std::string render_program(const Program& p);

enum class DiagnosticKind {
  EmptyProgram,
  ArityError,
  ForwardStepRef,
  ArgumentKind,    // row name in math op, number in table op, ...
  BooleanOperand,  // a greater() result feeding another operation
  UnknownConstant,
  UngroundedNumber,
  RowNotFound,
  DuplicateRow,  // warning: ambiguous row name, first match is used
  ConstantSpelling,
};

enum class Severity { Error, Warning };

struct Diagnostic {
  DiagnosticKind kind;
  Severity severity = Severity::Error;
  std::size_t step = 0;
  std::optional<std::size_t> arg;
  std::string message;
};

std::string_view diagnostic_kind_name(DiagnosticKind k);

struct ValidateOptions {
  const EvidenceContext* context = nullptr;
  const ConstantTable* constants = &ConstantTable::defaults();
};

/// Returns every problem found; no entry with Severity::Error means valid.
std::vector<Diagnostic> validate(const Program& p, const ValidateOptions& options = {});

bool has_errors(const std::vector<Diagnostic>& diags);

/// True when step `i` produces a boolean (its op is greater).
inline bool is_boolean_step(const Program& p, std::size_t i) {
  return p.steps[i].op == OpKind::Greater;
}

}  // namespace finqa
