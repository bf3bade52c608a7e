#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <set>

namespace finqa::support {

namespace {

const char* const kRowWords[] = {"net revenue",  "total assets",     "operating income", "interest expense",
                                 "cash flow",    "deferred tax",     "goodwill",         "capital lease",
                                 "net sales",    "depreciation",     "inventory",        "long-term debt"};

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Rational random_decimal(Rng& rng, int& decimals) {
  decimals = std::uniform_int_distribution<int>(0, 2)(rng);
  std::int64_t scale = decimals == 0 ? 1 : decimals == 1 ? 10 : 100;
  std::int64_t mag = std::uniform_int_distribution<std::int64_t>(0, 2'000'000)(rng);
  if (chance(rng, 0.3)) mag %= 1000;
  Rational v(mag, scale);
  if (chance(rng, 0.2)) v = -v;
  return v;
}

std::string digits_with_commas(std::string digits) {
  std::string out;
  int n = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (n && n % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++n;
  }
  return {out.rbegin(), out.rend()};
}

}  // namespace

std::string render_cell(const Rational& v, int decimals, Rng& rng) {
  BigInt scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  Rational t = abs(v) * scale;
  BigInt scaled = numerator(t) / denominator(t);
  std::string digits = scaled.str();
  while (static_cast<int>(digits.size()) <= decimals) digits.insert(digits.begin(), '0');
  std::string int_part = digits.substr(0, digits.size() - decimals);
  std::string frac = digits.substr(digits.size() - decimals);
  if (int_part.size() > 3 && chance(rng, 0.6)) int_part = digits_with_commas(int_part);
  std::string body = int_part + (decimals ? "." + frac : "");
  if (chance(rng, 0.2)) body = "$ " + body;
  if (chance(rng, 0.15)) body += "%";
  if (v < 0) return chance(rng, 0.5) ? "( " + body + " )" : "-" + body;
  return body;
}

GenContext random_context(Rng& rng) {
  GenContext g;
  std::vector<std::string> sentences;
  const std::size_t n_sent = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
  for (std::size_t i = 0; i < n_sent; ++i) {
    int d = 0;
    Rational v = random_decimal(rng, d);
    std::string text = v < 0 ? "-" : "";
    std::string plain = render_cell(abs(v), d, rng);
    // keep text numbers free of accounting parentheses
    text += plain;
    sentences.push_back("the balance was " + text + " at year end .");
    g.numbers.push_back(v);
  }

  sentences.push_back("terms ranged over 0 , 0.5 , 1.5 , 2 , 3 and -1 years .");

  std::vector<std::string> header = {"", "2019", "2018", "2017"};
  std::vector<std::string> names(std::begin(kRowWords), std::end(kRowWords));
  std::shuffle(names.begin(), names.end(), rng);
  const std::size_t n_rows = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
  std::vector<std::vector<std::string>> matrix{header};
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<std::string> row{names[r]};
    std::vector<std::optional<Rational>> truth;
    for (std::size_t c = 0; c + 1 < header.size(); ++c) {
      if (chance(rng, 0.15)) {
        row.push_back(chance(rng, 0.5) ? "n/a" : "-");
        truth.emplace_back();
        continue;
      }
      int d = 0;
      Rational v = random_decimal(rng, d);
      row.push_back(render_cell(v, d, rng));
      truth.emplace_back(v);
      g.numbers.push_back(v);
    }
    matrix.push_back(row);
    g.rows.emplace_back(names[r], truth);
  }
  if (g.numbers.empty()) g.numbers.push_back(Rational(2));
  g.ctx = EvidenceContext(sentences, FinTable::from_matrix(matrix), "what was the change ?");
  return g;
}

Program random_program(Rng& rng, const GenContext& g, const ProgramShape& shape) {
  Program p;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, shape.max_steps)(rng);
  const auto& constants = ConstantTable::defaults().entries();
  std::vector<OpKind> ops = {OpKind::Add, OpKind::Subtract, OpKind::Multiply, OpKind::Divide, OpKind::Exp};
  if (shape.allow_greater) ops.push_back(OpKind::Greater);
  if (shape.allow_tables && !g.rows.empty())
    for (OpKind op : {OpKind::TableSum, OpKind::TableAverage, OpKind::TableMax, OpKind::TableMin})
      ops.push_back(op);

  std::vector<std::size_t> numeric_steps;
  auto math_arg = [&]() -> Argument {
    if (!numeric_steps.empty() && chance(rng, 0.5)) return StepRef{pick(rng, numeric_steps)};
    if (chance(rng, 0.25)) {
      const auto& c = pick(rng, constants);
      return Constant{c.name, c.value};
    }
    return NumberLiteral{pick(rng, g.numbers)};
  };
  for (std::size_t i = 0; i < n; ++i) {
    OperationStep st;
    st.op = pick(rng, ops);
    if (is_table_op(st.op)) {
      std::string name = pick(rng, g.rows).first;
      if (chance(rng, 0.2)) name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      st.args.push_back(RowName{name});
    } else if (st.op == OpKind::Exp) {
      st.args.push_back(math_arg());
      static const std::vector<Rational> exponents = {Rational(2), Rational(3), Rational(1, 2),
                                                      Rational(-1), Rational(3, 2), Rational(0)};
      if (chance(rng, 0.3))
        st.args.push_back(Constant{"const_2", Rational(2)});
      else
        st.args.push_back(NumberLiteral{pick(rng, exponents)});
    } else {
      st.args.push_back(math_arg());
      st.args.push_back(math_arg());
    }
    if (st.op != OpKind::Greater) numeric_steps.push_back(i);
    p.steps.push_back(std::move(st));
  }
  return p;
}

namespace {

struct Failure {
  ExecErrorKind kind;
};

Rational int_power(const Rational& b, long k) {
  if (k < 0) {
    if (b == 0) throw Failure{ExecErrorKind::DivisionByZero};
    return 1 / int_power(b, -k);
  }
  Rational out(1);
  for (long i = 0; i < k; ++i) out *= b;
  return out;
}

Rational naive_power(const Rational& b, const Rational& e) {
  if (denominator(e) == 1 && abs(numerator(e)) <= 64) return int_power(b, numerator(e).convert_to<long>());
  if (b < 0) throw Failure{ExecErrorKind::DomainError};
  if (b == 0) {
    if (e < 0) throw Failure{ExecErrorKind::DivisionByZero};
    return Rational(0);
  }
  double v = std::pow(b.convert_to<double>(), e.convert_to<double>());
  if (!std::isfinite(v)) throw Failure{ExecErrorKind::DomainError};
  return Rational(v);
}

class TreeWalker {
 public:
  TreeWalker(const Program& p, const GenContext& g) : p_(p), g_(g) {}

  Value eval(std::size_t i) {
    const auto& st = p_.steps[i];
    if (is_table_op(st.op)) {
      const auto& name = std::get<RowName>(st.args[0]).name;
      const std::vector<std::optional<Rational>>* row = nullptr;
      for (const auto& [rname, cells] : g_.rows)
        if (lower(rname) == lower(name)) {
          row = &cells;
          break;
        }
      if (!row) throw Failure{ExecErrorKind::RowNotFound};
      std::vector<Rational> xs;
      for (const auto& c : *row)
        if (c) xs.push_back(*c);
      if (xs.empty()) throw Failure{ExecErrorKind::EmptyNumericRow};
      Rational acc = xs[0];
      for (std::size_t k = 1; k < xs.size(); ++k) {
        switch (st.op) {
          case OpKind::TableMax: acc = std::max(acc, xs[k]); break;
          case OpKind::TableMin: acc = std::min(acc, xs[k]); break;
          default: acc += xs[k]; break;
        }
      }
      if (st.op == OpKind::TableAverage) acc /= static_cast<long>(xs.size());
      return acc;
    }
    Rational a = number(st.args[0]);
    Rational b = number(st.args[1]);
    switch (st.op) {
      case OpKind::Add: return Rational(a + b);
      case OpKind::Subtract: return Rational(a - b);
      case OpKind::Multiply: return Rational(a * b);
      case OpKind::Divide:
        if (b == 0) throw Failure{ExecErrorKind::DivisionByZero};
        return Rational(a / b);
      case OpKind::Exp: return naive_power(a, b);
      case OpKind::Greater: return Value(a > b);
      default: break;
    }
    throw Failure{ExecErrorKind::InvalidProgram};
  }

 private:
  Rational number(const Argument& a) {
    if (const auto* r = std::get_if<StepRef>(&a)) {
      Value v = eval(r->index);
      if (!v.is_number()) throw Failure{ExecErrorKind::BooleanInArithmetic};
      return v.number();
    }
    if (const auto* n = std::get_if<NumberLiteral>(&a)) return n->value;
    if (const auto* c = std::get_if<Constant>(&a)) return c->value;
    throw Failure{ExecErrorKind::InvalidProgram};
  }

  const Program& p_;
  const GenContext& g_;
};

}  // namespace

NaiveResult naive_execute(const Program& p, const GenContext& g) {
  NaiveResult out;
  TreeWalker w(p, g);
  try {
    Value last;
    for (std::size_t i = 0; i < p.steps.size(); ++i) last = w.eval(i);
    out.value = last;
  } catch (const Failure& f) {
    out.error = f.kind;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees

NodePtr program_tree(const Program& p) {
  std::function<NodePtr(std::size_t)> build = [&](std::size_t i) {
    auto n = std::make_shared<Node>();
    n->op = p.steps[i].op;
    for (const auto& a : p.steps[i].args) {
      if (const auto* r = std::get_if<StepRef>(&a))
        n->args.emplace_back(build(r->index));
      else
        n->args.emplace_back(a);
    }
    return n;
  };
  return build(p.steps.size() - 1);
}

Program emit_program(const NodePtr& root, Rng& rng) {
  Program p;
  std::function<std::size_t(const NodePtr&)> emit = [&](const NodePtr& n) {
    std::vector<std::size_t> order(n->args.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Argument> args(n->args.size());
    for (std::size_t i : order) {
      if (const auto* child = std::get_if<NodePtr>(&n->args[i]))
        args[i] = StepRef{emit(*child)};
      else
        args[i] = std::get<Argument>(n->args[i]);
    }
    p.steps.push_back(OperationStep{n->op, std::move(args)});
    return p.steps.size() - 1;
  };
  emit(root);
  return p;
}

namespace {

using Slot = std::variant<Argument, NodePtr>;

NodePtr node(OpKind op, Slot a, Slot b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return n;
}

const NodePtr* as_node(const Slot& s) { return std::get_if<NodePtr>(&s); }

Slot rewrite_slot(const Slot& s, Rng& rng);

NodePtr rewrite_node(const NodePtr& n, Rng& rng) {
  if (n->args.size() != 2) return n;
  Slot a = rewrite_slot(n->args[0], rng);
  Slot b = rewrite_slot(n->args[1], rng);
  const OpKind op = n->op;
  const bool commutative = op == OpKind::Add || op == OpKind::Multiply;
  if (commutative && chance(rng, 0.5)) std::swap(a, b);
  if (commutative) {
    // (x op y) op z  ->  x op (y op z)
    if (const auto* l = as_node(a); l && (*l)->op == op && chance(rng, 0.5))
      return node(op, (*l)->args[0], node(op, (*l)->args[1], b));
    if (const auto* r = as_node(b); r && (*r)->op == op && chance(rng, 0.5))
      return node(op, node(op, a, (*r)->args[0]), (*r)->args[1]);
  }
  // x - (y + z)  ->  (x - y) - z, and x / (y * z)  ->  (x / y) / z
  const OpKind inverse = op == OpKind::Subtract ? OpKind::Add : OpKind::Multiply;
  if (op == OpKind::Subtract || op == OpKind::Divide) {
    if (const auto* r = as_node(b); r && (*r)->op == inverse && chance(rng, 0.5))
      return node(op, node(op, a, (*r)->args[0]), (*r)->args[1]);
    if (const auto* l = as_node(a); l && (*l)->op == op && chance(rng, 0.5))
      return node(op, (*l)->args[0], node(inverse, (*l)->args[1], b));
  }
  return node(op, a, b);
}

Slot rewrite_slot(const Slot& s, Rng& rng) {
  if (const auto* n = as_node(s)) return rewrite_node(*n, rng);
  return s;
}

}  // namespace

NodePtr rewrite_equivalent(const NodePtr& root, Rng& rng) { return rewrite_node(root, rng); }

NodePtr random_tree(Rng& rng, int depth, const std::vector<Argument>& leaves,
                    const std::vector<std::string>& rows) {
  static const std::vector<OpKind> math = {OpKind::Add, OpKind::Subtract, OpKind::Multiply,
                                           OpKind::Divide, OpKind::Exp};
  static const std::vector<OpKind> tables = {OpKind::TableSum, OpKind::TableAverage, OpKind::TableMax,
                                             OpKind::TableMin};
  std::function<Slot(int)> slot = [&](int d) -> Slot {
    if (d > 0 && chance(rng, 0.55)) return random_tree(rng, d - 1, leaves, rows);
    if (!rows.empty() && chance(rng, 0.15)) {
      auto n = std::make_shared<Node>();
      n->op = pick(rng, tables);
      n->args = {Argument{RowName{pick(rng, rows)}}};
      return n;
    }
    return pick(rng, leaves);
  };
  OpKind op = pick(rng, math);
  Slot a = slot(depth);
  // exponents stay leaves so evaluation at integer points is exact
  Slot b = op == OpKind::Exp ? Slot(pick(rng, leaves)) : slot(depth);
  return node(op, a, b);
}

NodePtr mutate(const NodePtr& root, Rng& rng, const std::vector<Argument>& leaves) {
  auto copy = std::make_shared<Node>(*root);
  std::vector<std::size_t> sub;
  for (std::size_t i = 0; i < copy->args.size(); ++i)
    if (as_node(copy->args[i])) sub.push_back(i);
  if (!sub.empty() && chance(rng, 0.5)) {
    std::size_t i = pick(rng, sub);
    copy->args[i] = mutate(*as_node(copy->args[i]), rng, leaves);
    return copy;
  }
  if (is_table_op(copy->op)) {
    copy->op = copy->op == OpKind::TableSum ? OpKind::TableMax : OpKind::TableSum;
    return copy;
  }
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0:
      if (copy->op != OpKind::Exp) {
        std::swap(copy->args[0], copy->args[1]);
        break;
      }
      [[fallthrough]];
    case 1: {
      static const std::vector<OpKind> math = {OpKind::Add, OpKind::Subtract, OpKind::Multiply,
                                               OpKind::Divide};
      if (copy->op != OpKind::Exp) copy->op = pick(rng, math);
      else copy->args[1] = pick(rng, leaves);
      break;
    }
    default: copy->args[0] = pick(rng, leaves); break;
  }
  return copy;
}

// ---------------------------------------------------------------------------
// Randomized oracle

namespace {

std::string var_key(const Argument& a) {
  if (const auto* n = std::get_if<NumberLiteral>(&a)) return "n:" + n->value.str();
  if (const auto* c = std::get_if<Constant>(&a)) return "n:" + c->value.str();
  if (const auto* r = std::get_if<RowName>(&a)) return "r:" + lower(r->name);
  if (const auto* s = std::get_if<Symbol>(&a)) return "s:" + s->name;
  return "?";
}

struct Invalid {};
struct Inexact {};

class PointEval {
 public:
  PointEval(const Program& p, const std::map<std::string, Rational>& point) : p_(p), point_(point) {}

  Value eval(std::size_t i) {
    auto it = memo_.find(i);
    if (it != memo_.end()) return it->second;
    const auto& st = p_.steps[i];
    Value out;
    if (is_table_op(st.op)) {
      out = point_.at("t:" + std::string(op_name(st.op)) + ":" + var_key(st.args[0]));
    } else {
      Rational a = arg(st.args[0]);
      Rational b = arg(st.args[1]);
      switch (st.op) {
        case OpKind::Add: out = Rational(a + b); break;
        case OpKind::Subtract: out = Rational(a - b); break;
        case OpKind::Multiply: out = Rational(a * b); break;
        case OpKind::Divide:
          if (b == 0) throw Invalid{};
          out = Rational(a / b);
          break;
        case OpKind::Exp:
          if (denominator(b) != 1 || abs(numerator(b)) > 64) throw Inexact{};
          if (a == 0 && b < 0) throw Invalid{};
          out = int_power(a, numerator(b).convert_to<long>());
          break;
        case OpKind::Greater: out = Value(a > b); break;
        default: throw Invalid{};
      }
    }
    memo_.emplace(i, out);
    return out;
  }

 private:
  Rational arg(const Argument& a) {
    if (const auto* r = std::get_if<StepRef>(&a)) return eval(r->index).number();
    return point_.at(var_key(a));
  }

  const Program& p_;
  const std::map<std::string, Rational>& point_;
  std::map<std::size_t, Value> memo_;
};

// Variables of each step's subtree, and those reaching an exponent slot.
void collect_vars(const Program& p, std::set<std::string>& all, std::set<std::string>& exponent) {
  std::vector<std::set<std::string>> sub(p.steps.size());
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const auto& st = p.steps[i];
    std::vector<std::set<std::string>> per_arg;
    for (const auto& a : st.args) {
      std::set<std::string> s;
      if (const auto* r = std::get_if<StepRef>(&a))
        s = sub[r->index];
      else if (is_table_op(st.op))
        s.insert("t:" + std::string(op_name(st.op)) + ":" + var_key(a));
      else
        s.insert(var_key(a));
      per_arg.push_back(s);
      sub[i].insert(s.begin(), s.end());
    }
    all.insert(sub[i].begin(), sub[i].end());
    if (st.op == OpKind::Exp) exponent.insert(per_arg[1].begin(), per_arg[1].end());
  }
}

}  // namespace

OracleVerdict randomized_oracle(const Program& a, const Program& b, std::size_t points,
                                std::uint64_t seed) {
  const bool ba = a.steps.back().op == OpKind::Greater;
  const bool bb = b.steps.back().op == OpKind::Greater;
  if (ba != bb) return OracleVerdict::IncomparableTypes;
  std::set<std::string> vars, exponent;
  collect_vars(a, vars, exponent);
  collect_vars(b, vars, exponent);
  // exponent variables also feed everything downstream of them; keep them small
  Rng rng(seed);
  std::uniform_int_distribution<std::int64_t> wide(-(std::int64_t(1) << 62), std::int64_t(1) << 62);
  std::uniform_int_distribution<std::int64_t> narrow(-4, 4);
  std::size_t valid = 0;
  for (std::size_t attempt = 0; attempt < points * 16 && valid < points; ++attempt) {
    std::map<std::string, Rational> point;
    for (const auto& v : vars) point[v] = Rational(exponent.count(v) ? narrow(rng) : wide(rng));
    Value va, vb;
    try {
      va = PointEval(a, point).eval(a.steps.size() - 1);
      vb = PointEval(b, point).eval(b.steps.size() - 1);
    } catch (const Invalid&) {
      continue;
    } catch (const Inexact&) {
      continue;
    }
    ++valid;
    if (!(va == vb)) return OracleVerdict::NotEquivalent;
  }
  return valid == 0 ? OracleVerdict::Undetermined : OracleVerdict::Equivalent;
}

}  // namespace finqa::support
