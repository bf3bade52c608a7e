#include "finqa/exec.hpp"

#include <algorithm>
#include <cmath>

namespace finqa {

namespace {

constexpr long kMaxExactExponent = 4096;

[[noreturn]] void raise(ExecErrorKind kind, std::size_t step, const std::string& msg) {
  throw ExecError(kind, step, msg);
}

Rational exact_power(Rational base, BigInt e) {
  bool invert = e < 0;
  if (invert) e = -e;
  Rational result(1);
  while (e > 0) {
    if ((e & 1) != 0) result *= base;
    e >>= 1;
    if (e > 0) base *= base;
  }
  return invert ? Rational(1 / result) : result;
}

const Rational& as_number(const Resolved& r, std::size_t step) {
  if (const auto* n = std::get_if<Rational>(&r)) return *n;
  raise(ExecErrorKind::InvalidProgram, step, "row operand given to an arithmetic operation");
}

}  // namespace

std::string Value::to_string(int max_digits) const {
  if (is_boolean()) return boolean() ? "yes" : "no";
  return to_decimal_string(number(), max_digits);
}

std::string_view exec_error_kind_name(ExecErrorKind k) {
  switch (k) {
    case ExecErrorKind::DivisionByZero: return "DivisionByZero";
    case ExecErrorKind::RowNotFound: return "RowNotFound";
    case ExecErrorKind::EmptyNumericRow: return "EmptyNumericRow";
    case ExecErrorKind::BooleanInArithmetic: return "BooleanInArithmetic";
    case ExecErrorKind::UngroundedNumber: return "UngroundedNumber";
    case ExecErrorKind::DomainError: return "DomainError";
    case ExecErrorKind::InvalidProgram: return "InvalidProgram";
    case ExecErrorKind::UnboundSymbol: return "UnboundSymbol";
  }
  return "ExecError";
}

ExecError::ExecError(ExecErrorKind kind, std::size_t step, const std::string& message)
    : std::runtime_error(std::string(exec_error_kind_name(kind)) + " at step " +
                         std::to_string(step) + ": " + message),
      kind_(kind),
      step_(step) {}

Rational power(const Rational& base, const Rational& exponent) {
  if (is_integer(exponent) && abs(numerator(exponent)) <= kMaxExactExponent) {
    if (base == 0 && exponent < 0) raise(ExecErrorKind::DivisionByZero, 0, "zero to a negative power");
    return exact_power(base, numerator(exponent));
  }
  if (base < 0 && !is_integer(exponent))
    raise(ExecErrorKind::DomainError, 0, "negative base with non-integer exponent");
  if (base == 0) {
    if (exponent < 0) raise(ExecErrorKind::DivisionByZero, 0, "zero to a negative power");
    return Rational(0);
  }
  double v = std::pow(to_double(base), to_double(exponent));
  if (!std::isfinite(v)) raise(ExecErrorKind::DomainError, 0, "power overflows");
  return rational_from_double(v);
}

std::vector<Rational> row_numbers(const FinTable::Row& row) {
  std::vector<Rational> out;
  out.reserve(row.cells.size());
  for (const auto& c : row.cells)
    if (auto v = cell_value(c)) out.push_back(std::move(*v));
  return out;
}

Rational aggregate_row(const std::vector<Rational>& cells, Aggregate kind) {
  if (cells.empty()) raise(ExecErrorKind::EmptyNumericRow, 0, "row has no numeric cells");
  switch (kind) {
    case Aggregate::Sum: {
      Rational s(0);
      for (const auto& c : cells) s += c;
      return s;
    }
    case Aggregate::Average: {
      Rational s(0);
      for (const auto& c : cells) s += c;
      return s / static_cast<long>(cells.size());
    }
    case Aggregate::Max: return *std::max_element(cells.begin(), cells.end());
    case Aggregate::Min: return *std::min_element(cells.begin(), cells.end());
  }
  return Rational(0);
}

Resolved resolve_argument(const Argument& arg, const EvidenceContext& ctx, const StepEnv& env,
                          const ExecOptions& options, std::vector<std::string>* warnings) {
  const std::size_t step = env.size();
  if (const auto* lit = std::get_if<NumberLiteral>(&arg)) {
    if (!ctx.mentions(lit->value)) {
      auto what = to_decimal_string(lit->value) + " does not appear in the evidence";
      if (options.grounding == Grounding::Strict) raise(ExecErrorKind::UngroundedNumber, step, what);
      if (warnings) warnings->push_back("step " + std::to_string(step) + ": " + what);
    }
    return lit->value;
  }
  if (const auto* c = std::get_if<Constant>(&arg)) {
    auto v = options.constants->lookup(c->name);
    if (!v) raise(ExecErrorKind::InvalidProgram, step, "unknown constant " + c->name);
    return *v;
  }
  if (const auto* ref = std::get_if<StepRef>(&arg)) {
    if (ref->index >= env.size())
      raise(ExecErrorKind::InvalidProgram, step, "#" + std::to_string(ref->index) + " is not yet computed");
    const Value& v = env.at(ref->index);
    if (v.is_boolean())
      raise(ExecErrorKind::BooleanInArithmetic, step,
            "#" + std::to_string(ref->index) + " is a boolean result");
    return v.number();
  }
  if (const auto* row = std::get_if<RowName>(&arg)) {
    auto hits = ctx.find_rows(row->name);
    if (hits.empty()) raise(ExecErrorKind::RowNotFound, step, "no table row '" + row->name + "'");
    if (hits.size() > 1 && warnings)
      warnings->push_back("row '" + row->name + "' matches " + std::to_string(hits.size()) +
                          " rows; using the first");
    return row_numbers(ctx.table().rows[hits.front()]);
  }
  const auto& sym = std::get<Symbol>(arg);
  raise(ExecErrorKind::UnboundSymbol, step, "symbol '" + sym.name + "' has no value");
}

Value eval_step(OpKind op, const std::vector<Resolved>& args, const StepEnv& env) {
  const std::size_t step = env.size();
  if (args.size() != op_arity(op))
    raise(ExecErrorKind::InvalidProgram, step, "wrong number of arguments");
  try {
    if (is_table_op(op)) {
      const auto* cells = std::get_if<std::vector<Rational>>(&args[0]);
      if (!cells) raise(ExecErrorKind::InvalidProgram, step, "table operation needs a row");
      switch (op) {
        case OpKind::TableSum: return aggregate_row(*cells, Aggregate::Sum);
        case OpKind::TableAverage: return aggregate_row(*cells, Aggregate::Average);
        case OpKind::TableMax: return aggregate_row(*cells, Aggregate::Max);
        default: return aggregate_row(*cells, Aggregate::Min);
      }
    }
    const Rational& a = as_number(args[0], step);
    const Rational& b = as_number(args[1], step);
    switch (op) {
      case OpKind::Add: return Rational(a + b);
      case OpKind::Subtract: return Rational(a - b);
      case OpKind::Multiply: return Rational(a * b);
      case OpKind::Divide:
        if (b == 0) raise(ExecErrorKind::DivisionByZero, step, "division by zero");
        return Rational(a / b);
      case OpKind::Exp: return power(a, b);
      case OpKind::Greater: return Value(a > b);
      default: break;
    }
  } catch (const ExecError& e) {
    if (e.step() == step) throw;
    // errors raised by helpers carry step 0; re-tag with the real step
    std::string what = e.what();
    auto colon = what.find(": ");
    throw ExecError(e.kind(), step, colon == std::string::npos ? what : what.substr(colon + 2));
  }
  raise(ExecErrorKind::InvalidProgram, step, "unsupported operation");
}

Execution run(const Program& p, const EvidenceContext& ctx, const ExecOptions& options) {
  if (p.steps.empty()) raise(ExecErrorKind::InvalidProgram, 0, "empty program");
  Execution ex;
  for (const auto& st : p.steps) {
    std::vector<Resolved> args;
    args.reserve(st.args.size());
    for (const auto& a : st.args)
      args.push_back(resolve_argument(a, ctx, ex.env, options, &ex.warnings));
    ex.env.push(eval_step(st.op, args, ex.env));
  }
  ex.answer = ex.env.results().back();
  return ex;
}

Value execute(const Program& p, const EvidenceContext& ctx, const ExecOptions& options) {
  return run(p, ctx, options).answer;
}

}  // namespace finqa
