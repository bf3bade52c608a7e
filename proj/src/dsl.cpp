#include "finqa/dsl.hpp"

#include <array>
#include <cctype>

namespace finqa {

namespace {

struct OpInfo {
  OpKind op;
  std::string_view name;
  std::string_view alt;
  std::size_t arity;
};

constexpr std::array<OpInfo, kOpCount> kOps{{
    {OpKind::Add, "add", "add", 2},
    {OpKind::Subtract, "subtract", "subtract", 2},
    {OpKind::Multiply, "multiply", "multiply", 2},
    {OpKind::Divide, "divide", "divide", 2},
    {OpKind::Exp, "exp", "exp", 2},
    {OpKind::Greater, "greater", "greater", 2},
    {OpKind::TableSum, "table-sum", "table_sum", 1},
    {OpKind::TableAverage, "table-average", "table_average", 1},
    {OpKind::TableMax, "table-max", "table_max", 1},
    {OpKind::TableMin, "table-min", "table_min", 1},
}};

const OpInfo& info(OpKind op) { return kOps[static_cast<std::size_t>(op)]; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// Parses `const_<digits>` or `const_m<digits>`.
std::optional<Rational> systematic_constant(std::string_view name) {
  constexpr std::string_view prefix = "const_";
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto rest = name.substr(prefix.size());
  bool neg = false;
  if (!rest.empty() && rest.front() == 'm') {
    neg = true;
    rest.remove_prefix(1);
  }
  if (rest.empty()) return std::nullopt;
  for (char c : rest)
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
  auto first = rest.find_first_not_of('0');
  Rational v = first == std::string_view::npos ? Rational(0)
                                                : Rational(BigInt(std::string(rest.substr(first))));
  return neg ? Rational(-v) : v;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : s_(text), opts_(options) {}

  Program run() {
    Program p;
    skip();
    if (at_end()) fail(ParseErrorKind::Syntax, "expected operation name");
    for (;;) {
      p.steps.push_back(step());
      skip();
      if (at_end()) break;
      expect(',', "',' between steps or end of program");
    }
    return p;
  }

 private:
  [[noreturn]] void fail(ParseErrorKind kind, const std::string& what) const {
    throw ParseError(kind, pos_, what + " at offset " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= s_.size(); }
  void skip() {
    while (!at_end() && is_space(s_[pos_])) ++pos_;
  }
  void expect(char c, const char* what) {
    skip();
    if (at_end() || s_[pos_] != c) fail(ParseErrorKind::Syntax, std::string("expected ") + what);
    ++pos_;
  }

  OperationStep step() {
    skip();
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
                         s_[pos_] == '-'))
      ++pos_;
    auto name = s_.substr(start, pos_ - start);
    if (name.empty()) fail(ParseErrorKind::Syntax, "expected operation name");
    auto op = op_from_name(name);
    if (!op) {
      pos_ = start;
      fail(ParseErrorKind::UnknownOperation, "unknown operation '" + std::string(name) + "'");
    }
    OperationStep st;
    st.op = *op;
    expect('(', "'(' after operation name");
    skip();
    if (!at_end() && s_[pos_] == ')') {
      ++pos_;
      return st;
    }
    for (;;) {
      st.args.push_back(argument(*op));
      skip();
      if (at_end()) fail(ParseErrorKind::Syntax, "expected ',' or ')'");
      if (s_[pos_] == ')') {
        ++pos_;
        break;
      }
      expect(',', "',' or ')'");
    }
    return st;
  }

  Argument argument(OpKind op) {
    skip();
    std::size_t start = pos_;
    if (!at_end() && s_[pos_] == '"') return RowName{quoted()};

    int depth = 0;
    while (!at_end()) {
      char c = s_[pos_];
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        if (depth == 0) break;
        --depth;
      } else if (c == ',' && depth == 0) {
        break;
      }
      ++pos_;
    }
    if (depth != 0) fail(ParseErrorKind::Syntax, "unbalanced '(' in argument");
    auto text = trim(s_.substr(start, pos_ - start));
    std::size_t arg_pos = start;
    if (text.empty()) {
      pos_ = arg_pos;
      fail(ParseErrorKind::Syntax, "expected argument");
    }

    if (text.front() == '#') {
      auto digits = text.substr(1);
      if (digits.empty() || digits.size() > 9) {
        pos_ = arg_pos;
        fail(ParseErrorKind::Syntax, "expected step index after '#'");
      }
      std::size_t n = 0;
      for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
          pos_ = arg_pos;
          fail(ParseErrorKind::Syntax, "expected step index after '#'");
        }
        n = n * 10 + static_cast<std::size_t>(c - '0');
      }
      return StepRef{n};
    }
    // table operations only take rows, so "2017" there is a row name
    if (is_table_op(op)) return RowName{std::string(text)};
    if (text.substr(0, 6) == "const_") {
      if (auto v = opts_.constants->lookup(text)) return Constant{std::string(text), *v};
      pos_ = arg_pos;
      fail(ParseErrorKind::UnknownConstant, "unknown constant '" + std::string(text) + "'");
    }
    if (auto q = try_parse_quantity(text)) return NumberLiteral{q->mantissa};
    if (opts_.symbolic && !is_table_op(op)) return Symbol{std::string(text)};
    return RowName{std::string(text)};
  }

  std::string quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (!at_end() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (at_end()) fail(ParseErrorKind::Syntax, "unterminated quoted row name");
    ++pos_;
    return out;
  }

  std::string_view s_;
  const ParseOptions& opts_;
  std::size_t pos_ = 0;
};

bool needs_quotes(const std::string& name) {
  if (name.empty()) return true;
  if (is_space(name.front()) || is_space(name.back())) return true;
  if (name.front() == '#' || name.front() == '"') return true;
  if (name.rfind("const_", 0) == 0) return true;
  if (try_parse_quantity(name)) return true;
  int depth = 0;
  for (char c : name) {
    if (c == ',' || c == '"' || c == '\\') return true;
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) return true;
  }
  return depth != 0;
}

}  // namespace

std::string_view op_name(OpKind op) { return info(op).name; }

std::optional<OpKind> op_from_name(std::string_view name) {
  for (const auto& o : kOps)
    if (o.name == name || o.alt == name) return o.op;
  return std::nullopt;
}

bool is_table_op(OpKind op) {
  return op == OpKind::TableSum || op == OpKind::TableAverage || op == OpKind::TableMax ||
         op == OpKind::TableMin;
}

std::size_t op_arity(OpKind op) { return info(op).arity; }

ConstantTable::ConstantTable(std::vector<Entry> entries, bool accept_systematic)
    : entries_(std::move(entries)), accept_systematic_(accept_systematic) {}

const ConstantTable& ConstantTable::defaults() {
  static const ConstantTable table({
      {"const_1", Rational(1)},
      {"const_2", Rational(2)},
      {"const_3", Rational(3)},
      {"const_4", Rational(4)},
      {"const_5", Rational(5)},
      {"const_10", Rational(10)},
      {"const_100", Rational(100)},
      {"const_1000", Rational(1000)},
      {"const_1000000", Rational(1000000)},
      {"const_m1", Rational(-1)},
  });
  return table;
}

const ConstantTable& ConstantTable::permissive() {
  static const ConstantTable table(defaults().entries(), true);
  return table;
}

std::optional<Rational> ConstantTable::lookup(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e.value;
  if (accept_systematic_) return systematic_constant(name);
  return std::nullopt;
}

std::optional<std::string> ConstantTable::name_for(const Rational& v) const {
  for (const auto& e : entries_)
    if (e.value == v) return e.name;
  return std::nullopt;
}

std::string_view parse_error_kind_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Syntax: return "SyntaxError";
    case ParseErrorKind::Arity: return "ArityError";
    case ParseErrorKind::UnknownOperation: return "UnknownOperation";
    case ParseErrorKind::ForwardStepRef: return "ForwardStepRef";
    case ParseErrorKind::UnknownConstant: return "UnknownConstant";
  }
  return "ParseError";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t position, std::string message)
    : std::runtime_error(std::string(parse_error_kind_name(kind)) + ": " + message),
      kind_(kind),
      position_(position) {}

Program parse_program_syntax(std::string_view text, const ParseOptions& options) {
  Program p = Parser(text, options).run();
  if (options.release_syntax) strip_release_none(p);
  return p;
}

std::size_t strip_release_none(Program& p) {
  std::size_t changed = 0;
  for (auto& st : p.steps) {
    if (!is_table_op(st.op) || st.args.size() < 2) continue;
    const auto* last = std::get_if<RowName>(&st.args.back());
    if (!last || normalize_row_name(last->name) != "none") continue;
    st.args.pop_back();
    std::string joined;
    bool rows_only = true;
    for (const auto& a : st.args) {
      const auto* r = std::get_if<RowName>(&a);
      if (!r) rows_only = false;
      else joined += (joined.empty() ? "" : ", ") + r->name;
    }
    if (rows_only && st.args.size() > 1) st.args = {RowName{joined}};
    ++changed;
  }
  return changed;
}

Program parse_program(std::string_view text, const ParseOptions& options) {
  Program p = parse_program_syntax(text, options);
  ValidateOptions vo;
  vo.constants = options.constants;
  for (const auto& d : validate(p, vo)) {
    if (d.severity != Severity::Error) continue;
    switch (d.kind) {
      case DiagnosticKind::ArityError: throw ParseError(ParseErrorKind::Arity, 0, d.message);
      case DiagnosticKind::ForwardStepRef:
        throw ParseError(ParseErrorKind::ForwardStepRef, 0, d.message);
      case DiagnosticKind::UnknownConstant:
        throw ParseError(ParseErrorKind::UnknownConstant, 0, d.message);
      case DiagnosticKind::ArgumentKind: throw ParseError(ParseErrorKind::Syntax, 0, d.message);
      default: break;  // type errors surface at execution
    }
  }
  return p;
}

std::string render_argument(const Argument& arg) {
  struct Visitor {
    std::string operator()(const NumberLiteral& n) const { return to_decimal_string(n.value); }
    std::string operator()(const Constant& c) const { return c.name; }
    std::string operator()(const StepRef& r) const { return "#" + std::to_string(r.index); }
    std::string operator()(const Symbol& s) const { return s.name; }
    std::string operator()(const RowName& r) const {
      if (!needs_quotes(r.name)) return r.name;
      std::string out = "\"";
      for (char c : r.name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, arg);
}

std::string render_program(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    if (i) out += ", ";
    const auto& st = p.steps[i];
    out += op_name(st.op);
    out += '(';
    for (std::size_t j = 0; j < st.args.size(); ++j) {
      if (j) out += ", ";
      out += render_argument(st.args[j]);
    }
    out += ')';
  }
  return out;
}

std::string_view diagnostic_kind_name(DiagnosticKind k) {
  switch (k) {
    case DiagnosticKind::EmptyProgram: return "EmptyProgram";
    case DiagnosticKind::ArityError: return "ArityError";
    case DiagnosticKind::ForwardStepRef: return "ForwardStepRef";
    case DiagnosticKind::ArgumentKind: return "ArgumentKind";
    case DiagnosticKind::BooleanOperand: return "BooleanOperand";
    case DiagnosticKind::UnknownConstant: return "UnknownConstant";
    case DiagnosticKind::UngroundedNumber: return "UngroundedNumber";
    case DiagnosticKind::RowNotFound: return "RowNotFound";
    case DiagnosticKind::DuplicateRow: return "DuplicateRow";
    case DiagnosticKind::ConstantSpelling: return "ConstantSpelling";
  }
  return "Diagnostic";
}

std::vector<Diagnostic> validate(const Program& p, const ValidateOptions& options) {
  std::vector<Diagnostic> out;
  auto report = [&out](DiagnosticKind kind, std::size_t step, std::optional<std::size_t> arg,
                       std::string msg, Severity sev = Severity::Error) {
    out.push_back(Diagnostic{kind, sev, step, arg, std::move(msg)});
  };

  if (p.steps.empty()) {
    report(DiagnosticKind::EmptyProgram, 0, std::nullopt, "program has no steps");
    return out;
  }

  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const auto& st = p.steps[i];
    const bool table = is_table_op(st.op);
    if (st.args.size() != op_arity(st.op)) {
      report(DiagnosticKind::ArityError, i, std::nullopt,
             "step " + std::to_string(i) + ": " + std::string(op_name(st.op)) + " takes " +
                 std::to_string(op_arity(st.op)) + " argument(s), got " +
                 std::to_string(st.args.size()));
    }
    for (std::size_t j = 0; j < st.args.size(); ++j) {
      const auto& arg = st.args[j];
      const std::string where = "step " + std::to_string(i) + " arg " + std::to_string(j) + ": ";
      if (table) {
        const auto* row = std::get_if<RowName>(&arg);
        if (!row) {
          report(DiagnosticKind::ArgumentKind, i, j,
                 where + std::string(op_name(st.op)) + " expects a table row name");
          continue;
        }
        if (options.context) {
          auto hits = options.context->find_rows(row->name);
          if (hits.empty()) {
            report(DiagnosticKind::RowNotFound, i, j, where + "no table row '" + row->name + "'");
          } else if (hits.size() > 1) {
            report(DiagnosticKind::DuplicateRow, i, j,
                   where + "row '" + row->name + "' matches " + std::to_string(hits.size()) +
                       " rows; the first is used",
                   Severity::Warning);
          }
        }
        continue;
      }
      if (const auto* ref = std::get_if<StepRef>(&arg)) {
        if (ref->index >= i) {
          report(DiagnosticKind::ForwardStepRef, i, j,
                 where + "#" + std::to_string(ref->index) + " does not refer to an earlier step");
        } else if (is_boolean_step(p, ref->index)) {
          report(DiagnosticKind::BooleanOperand, i, j,
                 where + "#" + std::to_string(ref->index) + " is a boolean result");
        }
      } else if (const auto* c = std::get_if<Constant>(&arg)) {
        auto v = options.constants->lookup(c->name);
        if (!v || *v != c->value)
          report(DiagnosticKind::UnknownConstant, i, j, where + "unknown constant '" + c->name + "'");
      } else if (const auto* row = std::get_if<RowName>(&arg)) {
        report(DiagnosticKind::ArgumentKind, i, j,
               where + "expected number, constant or step reference, got '" + row->name + "'");
      } else if (const auto* lit = std::get_if<NumberLiteral>(&arg)) {
        if (options.context && !options.context->mentions(lit->value)) {
          report(DiagnosticKind::UngroundedNumber, i, j,
                 where + to_decimal_string(lit->value) + " does not appear in the evidence");
        }
      }
    }
  }
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

}  // namespace finqa
