#pragma once

// Program accuracy: two programs match when, after replacing every argument
// with a symbol, they compute the same function of those symbols.
//
// The decision runs in two stages. Both programs are inlined into expression
// trees and brought to a canonical form (sums and products flattened into
// sorted multisets). If the canonical forms differ, both trees are evaluated
// at K random integer assignments over exact rationals; agreement at every
// point means equivalent.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finqa/dsl.hpp"
#include "finqa/numeric.hpp"

namespace finqa {

using SymbolId = std::size_t;

struct SymbolInfo {
  enum class Kind { Number, Row, Free };
  Kind kind;
  std::string label;              // rendered literal, normalized row name, or symbol name
  std::optional<Rational> value;  // Number symbols
};

/// Symbols shared by both programs of a comparison pair.
struct SymbolTable {
  std::vector<SymbolInfo> symbols;
  std::size_t size() const { return symbols.size(); }
};

struct SymbolArg {
  SymbolId id;
  friend bool operator==(const SymbolArg&, const SymbolArg&) = default;
};

using SymbolicArg = std::variant<SymbolArg, StepRef>;

struct SymbolicStep {
  OpKind op;
  std::vector<SymbolicArg> args;
  friend bool operator==(const SymbolicStep&, const SymbolicStep&) = default;
};

struct SymbolicProgram {
  std::vector<SymbolicStep> steps;
  friend bool operator==(const SymbolicProgram&, const SymbolicProgram&) = default;
};

struct SymbolizedPair {
  SymbolicProgram first;
  SymbolicProgram second;
  SymbolTable symbols;
};

/// Value-identity symbolization: equal literal values (including constants of
/// equal value) share a symbol, as do rows with equal normalized names.
SymbolizedPair pair_symbolize(const Program& p1, const Program& p2);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression over symbols. Sum terms carry integer coefficients, product
/// factors carry integer exponents.
struct Expr {
  enum class Kind { Leaf, Const, Table, Sum, Product, Pow, Greater };

  Kind kind = Kind::Leaf;
  SymbolId symbol = 0;           // Leaf; row symbol for Table
  OpKind table_op = OpKind::TableSum;
  Rational constant;             // Const
  std::vector<std::pair<long, ExprPtr>> terms;  // Sum / Product
  ExprPtr lhs, rhs;              // Pow (base, exponent), Greater

  static ExprPtr leaf(SymbolId s);
  static ExprPtr constant_of(Rational v);
  static ExprPtr table(OpKind op, SymbolId row);
  static ExprPtr sum(std::vector<std::pair<long, ExprPtr>> terms);
  static ExprPtr product(std::vector<std::pair<long, ExprPtr>> factors);
  static ExprPtr pow(ExprPtr base, ExprPtr exponent);
  static ExprPtr greater(ExprPtr lhs, ExprPtr rhs);
};

/// Inlines step references; the root is the last step and dead steps vanish.
ExprPtr to_expression(const SymbolicProgram& sp);

/// AC-flattened canonical form with children in a total order.
ExprPtr normalize(const ExprPtr& e);

/// Structural key; equal keys mean structurally identical expressions.
std::string canonical_key(const ExprPtr& e);

/// Human-readable form using the symbol labels ("(a + b) - c" style).
std::string describe(const ExprPtr& e, const SymbolTable& symbols);

struct EquivOptions {
  std::size_t samples = 32;
  std::uint64_t seed = 0x5eed;
  /// Attempts per required sample before giving up on invalid points.
  std::size_t attempts_per_sample = 16;
};

enum class Verdict { Equivalent, NotEquivalent, IncomparableTypes };

std::string_view verdict_name(Verdict v);

struct EquivResult {
  Verdict verdict = Verdict::NotEquivalent;
  bool canonical_match = false;
  std::size_t points_checked = 0;
  std::string canonical_first;
  std::string canonical_second;

  bool equivalent() const { return verdict == Verdict::Equivalent; }
};

/// Both programs must pass context-free validation (std::invalid_argument
/// otherwise).
EquivResult equivalent(const Program& p1, const Program& p2, const EquivOptions& options = {});

/// Randomized check alone, skipping the canonical comparison.
EquivResult randomized_equivalent(const Program& p1, const Program& p2,
                                  const EquivOptions& options = {});

/// False when `pred` does not parse or validate; otherwise equivalent().
bool program_accuracy(std::string_view pred_text, const Program& gold,
                      const EquivOptions& options = {},
                      const ConstantTable& constants = ConstantTable::defaults());
bool program_accuracy(const Program& pred, const Program& gold, const EquivOptions& options = {});

}  // namespace finqa
