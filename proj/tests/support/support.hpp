#pragma once

// Test-side generators and reference implementations. Nothing here calls into
// the executor or the equivalence checker.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "finqa/dsl.hpp"
#include "finqa/evidence.hpp"
#include "finqa/exec.hpp"

namespace finqa::support {

using Rng = std::mt19937_64;

/// An evidence context plus the exact values the generator wrote into it.
struct GenContext {
  EvidenceContext ctx;
  std::vector<Rational> numbers;                                     // literal pool
  std::vector<std::pair<std::string, std::vector<std::optional<Rational>>>> rows;  // truth
};

GenContext random_context(Rng& rng);

/// Text for a number the way a filing would print it.
std::string render_cell(const Rational& v, int decimals, Rng& rng);

struct ProgramShape {
  std::size_t max_steps = 5;
  bool allow_tables = true;
  bool allow_greater = true;
};

/// A program with no validation errors over the context's pools.
Program random_program(Rng& rng, const GenContext& g, const ProgramShape& shape = {});

/// Reference interpreter: walks the step tree from each step, reading row
/// values from the generator's truth table.
struct NaiveResult {
  std::optional<Value> value;
  std::optional<ExecErrorKind> error;
};
NaiveResult naive_execute(const Program& p, const GenContext& g);

/// Expression tree used to rewrite programs into equivalent forms.
struct Node;
using NodePtr = std::shared_ptr<Node>;
struct Node {
  OpKind op = OpKind::Add;
  std::vector<std::variant<Argument, NodePtr>> args;
};

NodePtr program_tree(const Program& p);
/// Emits the tree with children in random order.
Program emit_program(const NodePtr& root, Rng& rng);
/// Applies random commutation, association and subtraction/division
/// regrouping; the result denotes the same function.
NodePtr rewrite_equivalent(const NodePtr& root, Rng& rng);
NodePtr random_tree(Rng& rng, int depth, const std::vector<Argument>& leaves,
                    const std::vector<std::string>& rows);
/// Small structural change (operand swap, operation change, leaf change).
NodePtr mutate(const NodePtr& root, Rng& rng, const std::vector<Argument>& leaves);

/// Pure randomized judgment over exact rationals.
enum class OracleVerdict { Equivalent, NotEquivalent, IncomparableTypes, Undetermined };
OracleVerdict randomized_oracle(const Program& a, const Program& b, std::size_t points = 32,
                                std::uint64_t seed = 20211);

}  // namespace finqa::support
