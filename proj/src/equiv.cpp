#include "finqa/equiv.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace finqa {

namespace {

using Float = boost::multiprecision::cpp_bin_float_50;

constexpr long kMaxExactExponent = 64;

std::shared_ptr<Expr> make(Expr::Kind k) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  return e;
}

}  // namespace

ExprPtr Expr::leaf(SymbolId s) {
  auto e = make(Kind::Leaf);
  e->symbol = s;
  return e;
}

ExprPtr Expr::constant_of(Rational v) {
  auto e = make(Kind::Const);
  e->constant = std::move(v);
  return e;
}

ExprPtr Expr::table(OpKind op, SymbolId row) {
  auto e = make(Kind::Table);
  e->table_op = op;
  e->symbol = row;
  return e;
}

ExprPtr Expr::sum(std::vector<std::pair<long, ExprPtr>> terms) {
  auto e = make(Kind::Sum);
  e->terms = std::move(terms);
  return e;
}

ExprPtr Expr::product(std::vector<std::pair<long, ExprPtr>> factors) {
  auto e = make(Kind::Product);
  e->terms = std::move(factors);
  return e;
}

ExprPtr Expr::pow(ExprPtr base, ExprPtr exponent) {
  auto e = make(Kind::Pow);
  e->lhs = std::move(base);
  e->rhs = std::move(exponent);
  return e;
}

ExprPtr Expr::greater(ExprPtr lhs, ExprPtr rhs) {
  auto e = make(Kind::Greater);
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

// ---------------------------------------------------------------------------
// Symbolization

namespace {

class Symbolizer {
 public:
  SymbolicProgram run(const Program& p) {
    SymbolicProgram out;
    out.steps.reserve(p.steps.size());
    for (const auto& st : p.steps) {
      SymbolicStep ss{st.op, {}};
      for (const auto& a : st.args) ss.args.push_back(convert(a));
      out.steps.push_back(std::move(ss));
    }
    return out;
  }

  SymbolTable take() { return std::move(table_); }

 private:
  SymbolicArg convert(const Argument& a) {
    if (const auto* r = std::get_if<StepRef>(&a)) return *r;
    if (const auto* n = std::get_if<NumberLiteral>(&a)) return SymbolArg{number(n->value)};
    if (const auto* c = std::get_if<Constant>(&a)) return SymbolArg{number(c->value)};
    if (const auto* row = std::get_if<RowName>(&a)) {
      auto key = normalize_row_name(row->name);
      return SymbolArg{intern(rows_, key, SymbolInfo{SymbolInfo::Kind::Row, key, std::nullopt})};
    }
    const auto& s = std::get<Symbol>(a);
    return SymbolArg{intern(free_, s.name, SymbolInfo{SymbolInfo::Kind::Free, s.name, std::nullopt})};
  }

  SymbolId number(const Rational& v) {
    auto it = numbers_.find(v);
    if (it != numbers_.end()) return it->second;
    SymbolId id = table_.symbols.size();
    table_.symbols.push_back(SymbolInfo{SymbolInfo::Kind::Number, to_decimal_string(v), v});
    numbers_.emplace(v, id);
    return id;
  }

  SymbolId intern(std::map<std::string, SymbolId>& m, const std::string& key, SymbolInfo info) {
    auto it = m.find(key);
    if (it != m.end()) return it->second;
    SymbolId id = table_.symbols.size();
    table_.symbols.push_back(std::move(info));
    m.emplace(key, id);
    return id;
  }

  SymbolTable table_;
  std::map<Rational, SymbolId> numbers_;
  std::map<std::string, SymbolId> rows_;
  std::map<std::string, SymbolId> free_;
};

}  // namespace

SymbolizedPair pair_symbolize(const Program& p1, const Program& p2) {
  Symbolizer s;
  SymbolizedPair out;
  out.first = s.run(p1);
  out.second = s.run(p2);
  out.symbols = s.take();
  return out;
}

// ---------------------------------------------------------------------------
// Expressions

ExprPtr to_expression(const SymbolicProgram& sp) {
  if (sp.steps.empty()) throw std::invalid_argument("empty program");
  std::vector<ExprPtr> nodes;
  nodes.reserve(sp.steps.size());
  for (std::size_t i = 0; i < sp.steps.size(); ++i) {
    const auto& st = sp.steps[i];
    auto arg = [&](std::size_t j) -> ExprPtr {
      const auto& a = st.args.at(j);
      if (const auto* r = std::get_if<StepRef>(&a)) {
        if (r->index >= i) throw std::invalid_argument("step reference to a later step");
        return nodes[r->index];
      }
      return Expr::leaf(std::get<SymbolArg>(a).id);
    };
    switch (st.op) {
      case OpKind::Add: nodes.push_back(Expr::sum({{1, arg(0)}, {1, arg(1)}})); break;
      case OpKind::Subtract: nodes.push_back(Expr::sum({{1, arg(0)}, {-1, arg(1)}})); break;
      case OpKind::Multiply: nodes.push_back(Expr::product({{1, arg(0)}, {1, arg(1)}})); break;
      case OpKind::Divide: nodes.push_back(Expr::product({{1, arg(0)}, {-1, arg(1)}})); break;
      case OpKind::Exp: nodes.push_back(Expr::pow(arg(0), arg(1))); break;
      case OpKind::Greater: nodes.push_back(Expr::greater(arg(0), arg(1))); break;
      default: {
        const auto* s = std::get_if<SymbolArg>(&st.args.at(0));
        if (!s) throw std::invalid_argument("table operation over a step result");
        nodes.push_back(Expr::table(st.op, s->id));
        break;
      }
    }
  }
  return nodes.back();
}

std::string canonical_key(const ExprPtr& e) {
  switch (e->kind) {
    case Expr::Kind::Leaf: return "s" + std::to_string(e->symbol);
    case Expr::Kind::Const: return "k" + e->constant.str();
    case Expr::Kind::Table:
      return std::string(op_name(e->table_op)) + "[s" + std::to_string(e->symbol) + "]";
    case Expr::Kind::Sum:
    case Expr::Kind::Product: {
      bool sum = e->kind == Expr::Kind::Sum;
      std::string out = sum ? "sum(" : "prod(";
      for (std::size_t i = 0; i < e->terms.size(); ++i) {
        if (i) out += ',';
        const auto& [n, child] = e->terms[i];
        if (sum)
          out += std::to_string(n) + "*" + canonical_key(child);
        else
          out += canonical_key(child) + "^" + std::to_string(n);
      }
      return out + ")";
    }
    case Expr::Kind::Pow: return "pow(" + canonical_key(e->lhs) + "," + canonical_key(e->rhs) + ")";
    case Expr::Kind::Greater: return "gt(" + canonical_key(e->lhs) + "," + canonical_key(e->rhs) + ")";
  }
  return {};
}

namespace {

struct Normalizer {
  std::unordered_map<const Expr*, ExprPtr> memo;
  std::unordered_map<const Expr*, std::string> keys;

  const std::string& key(const ExprPtr& e) {
    auto it = keys.find(e.get());
    if (it != keys.end()) return it->second;
    return keys.emplace(e.get(), canonical_key(e)).first->second;
  }

  ExprPtr run(const ExprPtr& e) {
    auto it = memo.find(e.get());
    if (it != memo.end()) return it->second;
    ExprPtr out;
    switch (e->kind) {
      case Expr::Kind::Leaf:
      case Expr::Kind::Const:
      case Expr::Kind::Table: out = e; break;
      case Expr::Kind::Sum: out = sum(*e); break;
      case Expr::Kind::Product: out = product(*e); break;
      case Expr::Kind::Pow: out = Expr::pow(run(e->lhs), run(e->rhs)); break;
      case Expr::Kind::Greater: out = Expr::greater(run(e->lhs), run(e->rhs)); break;
    }
    memo.emplace(e.get(), out);
    return out;
  }

  // Collects children under their canonical key, merging multiplicities.
  struct Collector {
    std::map<std::string, std::pair<long, ExprPtr>> items;
    void add(const std::string& k, long n, const ExprPtr& e) {
      auto [it, inserted] = items.try_emplace(k, n, e);
      if (!inserted) it->second.first += n;
    }
    std::vector<std::pair<long, ExprPtr>> sorted() const {
      std::vector<std::pair<long, ExprPtr>> out;
      for (const auto& [k, v] : items)
        if (v.first != 0) out.push_back(v);
      return out;
    }
  };

  ExprPtr sum(const Expr& e) {
    Collector c;
    Rational constant(0);
    for (const auto& [coef, child] : e.terms) {
      auto n = run(child);
      if (n->kind == Expr::Kind::Const) {
        constant += n->constant * coef;
      } else if (n->kind == Expr::Kind::Sum) {
        for (const auto& [c2, g] : n->terms) {
          if (g->kind == Expr::Kind::Const)
            constant += g->constant * (coef * c2);
          else
            c.add(key(g), coef * c2, g);
        }
      } else {
        c.add(key(n), coef, n);
      }
    }
    auto terms = c.sorted();
    if (constant != 0) {
      auto k = Expr::constant_of(constant);
      terms.emplace_back(1, k);
      std::sort(terms.begin(), terms.end(),
                [this](const auto& a, const auto& b) { return key(a.second) < key(b.second); });
    }
    if (terms.empty()) return Expr::constant_of(Rational(0));
    if (terms.size() == 1 && terms.front().first == 1) return terms.front().second;
    return Expr::sum(std::move(terms));
  }

  ExprPtr product(const Expr& e) {
    Collector c;
    Rational coeff(1);
    auto fold = [&](const Rational& v, long k, const ExprPtr& node) {
      if (v == 0 && k < 0) {
        c.add(key(node), k, node);  // stays symbolic: division by zero
      } else if (v == 0) {
        coeff = 0;
      } else {
        Rational p(1);
        for (long i = 0; i < std::abs(k); ++i) p *= v;
        coeff *= k < 0 ? Rational(1 / p) : p;
      }
    };
    for (const auto& [k, child] : e.terms) {
      auto n = run(child);
      if (n->kind == Expr::Kind::Const) {
        fold(n->constant, k, n);
      } else if (n->kind == Expr::Kind::Product) {
        for (const auto& [k2, g] : n->terms) {
          if (g->kind == Expr::Kind::Const)
            fold(g->constant, k * k2, g);
          else
            c.add(key(g), k * k2, g);
        }
      } else {
        c.add(key(n), k, n);
      }
    }
    auto factors = c.sorted();
    if (coeff == 0) return Expr::constant_of(Rational(0));
    if (coeff != 1) {
      factors.emplace_back(1, Expr::constant_of(coeff));
      std::sort(factors.begin(), factors.end(),
                [this](const auto& a, const auto& b) { return key(a.second) < key(b.second); });
    }
    if (factors.empty()) return Expr::constant_of(coeff);
    if (factors.size() == 1 && factors.front().first == 1) return factors.front().second;
    return Expr::product(std::move(factors));
  }
};

}  // namespace

ExprPtr normalize(const ExprPtr& e) {
  Normalizer n;
  return n.run(e);
}

std::string describe(const ExprPtr& e, const SymbolTable& symbols) {
  auto label = [&symbols](SymbolId s) {
    return s < symbols.size() ? symbols.symbols[s].label : "s" + std::to_string(s);
  };
  switch (e->kind) {
    case Expr::Kind::Leaf: return label(e->symbol);
    case Expr::Kind::Const: return to_decimal_string(e->constant);
    case Expr::Kind::Table: return std::string(op_name(e->table_op)) + "(" + label(e->symbol) + ")";
    case Expr::Kind::Sum: {
      std::string out = "(";
      for (std::size_t i = 0; i < e->terms.size(); ++i) {
        auto [n, child] = e->terms[i];
        if (i) out += n < 0 ? " - " : " + ";
        else if (n < 0) out += "-";
        if (std::abs(n) != 1) out += std::to_string(std::abs(n)) + "*";
        out += describe(child, symbols);
      }
      return out + ")";
    }
    case Expr::Kind::Product: {
      std::string out = "(";
      bool first = true;
      for (const auto& [n, child] : e->terms) {
        if (!first) out += n < 0 ? " / " : " * ";
        else if (n < 0) out += "1 / ";
        first = false;
        out += describe(child, symbols);
        if (std::abs(n) != 1) out += "^" + std::to_string(std::abs(n));
      }
      return out + ")";
    }
    case Expr::Kind::Pow: return "(" + describe(e->lhs, symbols) + " ^ " + describe(e->rhs, symbols) + ")";
    case Expr::Kind::Greater:
      return "(" + describe(e->lhs, symbols) + " > " + describe(e->rhs, symbols) + ")";
  }
  return {};
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "equivalent";
    case Verdict::NotEquivalent: return "not-equivalent";
    case Verdict::IncomparableTypes: return "incomparable-types";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Randomized evaluation

namespace {

enum class Status { Ok, Invalid, NeedsApprox };

// Variables: one per symbol, plus one per distinct (table op, row) leaf.
struct VariableMap {
  std::size_t symbol_count = 0;
  std::vector<std::pair<OpKind, SymbolId>> table_leaves;
  std::unordered_set<std::size_t> in_exponent;

  std::size_t table_var(OpKind op, SymbolId row) {
    for (std::size_t i = 0; i < table_leaves.size(); ++i)
      if (table_leaves[i].first == op && table_leaves[i].second == row) return symbol_count + i;
    table_leaves.emplace_back(op, row);
    return symbol_count + table_leaves.size() - 1;
  }

  std::size_t size() const { return symbol_count + table_leaves.size(); }

  void scan(const ExprPtr& e, bool exponent) {
    switch (e->kind) {
      case Expr::Kind::Leaf:
        if (exponent) in_exponent.insert(e->symbol);
        break;
      case Expr::Kind::Table: {
        auto v = table_var(e->table_op, e->symbol);
        if (exponent) in_exponent.insert(v);
        break;
      }
      case Expr::Kind::Const: break;
      case Expr::Kind::Sum:
      case Expr::Kind::Product:
        for (const auto& t : e->terms) scan(t.second, exponent);
        break;
      case Expr::Kind::Pow:
        scan(e->lhs, exponent);
        scan(e->rhs, true);
        break;
      case Expr::Kind::Greater:
        scan(e->lhs, exponent);
        scan(e->rhs, exponent);
        break;
    }
  }
};

template <class Num>
struct Point {
  Num number{};
  bool boolean = false;
};

class Evaluator {
 public:
  Evaluator(VariableMap& vars, const std::vector<Rational>& assignment)
      : vars_(vars), assignment_(assignment) {}

  Status exact(const ExprPtr& e, Point<Rational>& out) { return eval_exact(e, out); }
  Status approx(const ExprPtr& e, Point<Float>& out) { return eval_approx(e, out); }

 private:
  Status eval_exact(const ExprPtr& e, Point<Rational>& out) {
    auto it = exact_memo_.find(e.get());
    if (it != exact_memo_.end()) {
      out = it->second.second;
      return it->second.first;
    }
    Status s = Status::Ok;
    switch (e->kind) {
      case Expr::Kind::Leaf: out.number = assignment_[e->symbol]; break;
      case Expr::Kind::Table: out.number = assignment_[vars_.table_var(e->table_op, e->symbol)]; break;
      case Expr::Kind::Const: out.number = e->constant; break;
      case Expr::Kind::Sum: {
        Rational acc(0);
        for (const auto& [n, child] : e->terms) {
          Point<Rational> v;
          if ((s = eval_exact(child, v)) != Status::Ok) break;
          acc += v.number * n;
        }
        out.number = acc;
        break;
      }
      case Expr::Kind::Product: {
        Rational acc(1);
        for (const auto& [n, child] : e->terms) {
          Point<Rational> v;
          if ((s = eval_exact(child, v)) != Status::Ok) break;
          if (v.number == 0 && n < 0) {
            s = Status::Invalid;
            break;
          }
          Rational p(1);
          for (long i = 0; i < std::abs(n); ++i) p *= v.number;
          acc *= n < 0 ? Rational(1 / p) : p;
        }
        out.number = acc;
        break;
      }
      case Expr::Kind::Pow: {
        Point<Rational> b, x;
        if ((s = eval_exact(e->lhs, b)) != Status::Ok) break;
        if ((s = eval_exact(e->rhs, x)) != Status::Ok) break;
        if (!is_integer(x.number) || abs(numerator(x.number)) > kMaxExactExponent) {
          s = Status::NeedsApprox;
          break;
        }
        long k = numerator(x.number).convert_to<long>();
        if (b.number == 0 && k < 0) {
          s = Status::Invalid;
          break;
        }
        Rational p(1);
        for (long i = 0; i < std::abs(k); ++i) p *= b.number;
        out.number = k < 0 ? Rational(1 / p) : p;
        break;
      }
      case Expr::Kind::Greater: {
        Point<Rational> l, r;
        if ((s = eval_exact(e->lhs, l)) != Status::Ok) break;
        if ((s = eval_exact(e->rhs, r)) != Status::Ok) break;
        out.boolean = l.number > r.number;
        break;
      }
    }
    exact_memo_.emplace(e.get(), std::pair{s, out});
    return s;
  }

  Status eval_approx(const ExprPtr& e, Point<Float>& out) {
    auto it = approx_memo_.find(e.get());
    if (it != approx_memo_.end()) {
      out = it->second.second;
      return it->second.first;
    }
    Status s = Status::Ok;
    auto rational_to_float = [](const Rational& r) {
      return Float(Float(numerator(r)) / Float(denominator(r)));
    };
    switch (e->kind) {
      case Expr::Kind::Leaf: out.number = rational_to_float(assignment_[e->symbol]); break;
      case Expr::Kind::Table:
        out.number = rational_to_float(assignment_[vars_.table_var(e->table_op, e->symbol)]);
        break;
      case Expr::Kind::Const: out.number = rational_to_float(e->constant); break;
      case Expr::Kind::Sum: {
        Float acc = 0;
        for (const auto& [n, child] : e->terms) {
          Point<Float> v;
          if ((s = eval_approx(child, v)) != Status::Ok) break;
          acc += v.number * n;
        }
        out.number = acc;
        break;
      }
      case Expr::Kind::Product: {
        Float acc = 1;
        for (const auto& [n, child] : e->terms) {
          Point<Float> v;
          if ((s = eval_approx(child, v)) != Status::Ok) break;
          if (v.number == 0 && n < 0) {
            s = Status::Invalid;
            break;
          }
          acc *= boost::multiprecision::pow(v.number, n);
        }
        out.number = acc;
        break;
      }
      case Expr::Kind::Pow: {
        Point<Float> b, x;
        if ((s = eval_approx(e->lhs, b)) != Status::Ok) break;
        if ((s = eval_approx(e->rhs, x)) != Status::Ok) break;
        bool integral = boost::multiprecision::trunc(x.number) == x.number;
        if ((b.number < 0 && !integral) || (b.number == 0 && x.number < 0)) {
          s = Status::Invalid;
          break;
        }
        out.number = boost::multiprecision::pow(b.number, x.number);
        if (!boost::multiprecision::isfinite(out.number)) s = Status::Invalid;
        break;
      }
      case Expr::Kind::Greater: {
        Point<Float> l, r;
        if ((s = eval_approx(e->lhs, l)) != Status::Ok) break;
        if ((s = eval_approx(e->rhs, r)) != Status::Ok) break;
        out.boolean = l.number > r.number;
        break;
      }
    }
    if (s == Status::Ok && e->kind != Expr::Kind::Greater &&
        !boost::multiprecision::isfinite(out.number))
      s = Status::Invalid;
    approx_memo_.emplace(e.get(), std::pair{s, out});
    return s;
  }

  VariableMap& vars_;
  const std::vector<Rational>& assignment_;
  std::unordered_map<const Expr*, std::pair<Status, Point<Rational>>> exact_memo_;
  std::unordered_map<const Expr*, std::pair<Status, Point<Float>>> approx_memo_;
};

bool approx_equal(const Float& a, const Float& b) {
  Float scale = std::max({Float(1), Float(abs(a)), Float(abs(b))});
  return abs(a - b) <= scale * Float("1e-30");
}

enum class Sampled { Agree, Disagree };

struct SampleOutcome {
  Sampled result = Sampled::Agree;
  std::size_t points = 0;
};

SampleOutcome sample_compare(const ExprPtr& a, const ExprPtr& b, std::size_t symbol_count,
                             const EquivOptions& options) {
  VariableMap vars;
  vars.symbol_count = symbol_count;
  vars.scan(a, false);
  vars.scan(b, false);
  const bool boolean = a->kind == Expr::Kind::Greater;

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::int64_t> wide(std::numeric_limits<std::int64_t>::min(),
                                                   std::numeric_limits<std::int64_t>::max());
  std::uniform_int_distribution<std::int64_t> narrow(-4, 4);

  SampleOutcome out;
  const std::size_t budget = options.samples * options.attempts_per_sample;
  for (std::size_t attempt = 0; attempt < budget && out.points < options.samples; ++attempt) {
    std::vector<Rational> assignment(vars.size());
    for (std::size_t v = 0; v < assignment.size(); ++v)
      assignment[v] = Rational(vars.in_exponent.count(v) ? narrow(rng) : wide(rng));

    Evaluator ev(vars, assignment);
    Point<Rational> ra, rb;
    Status sa = ev.exact(a, ra);
    Status sb = ev.exact(b, rb);
    if (sa == Status::Invalid || sb == Status::Invalid) continue;
    bool same;
    if (sa == Status::Ok && sb == Status::Ok) {
      same = boolean ? ra.boolean == rb.boolean : ra.number == rb.number;
    } else {
      Point<Float> fa, fb;
      if (ev.approx(a, fa) != Status::Ok || ev.approx(b, fb) != Status::Ok) continue;
      same = boolean ? fa.boolean == fb.boolean : approx_equal(fa.number, fb.number);
    }
    ++out.points;
    if (!same) {
      out.result = Sampled::Disagree;
      return out;
    }
  }
  return out;
}

void require_valid(const Program& p, const char* which) {
  ValidateOptions vo;
  vo.constants = &ConstantTable::permissive();
  auto diags = validate(p, vo);
  for (const auto& d : diags)
    if (d.severity == Severity::Error)
      throw std::invalid_argument(std::string(which) + " program is invalid: " + d.message);
}

EquivResult decide(const Program& p1, const Program& p2, const EquivOptions& options,
                   bool use_canonical) {
  require_valid(p1, "first");
  require_valid(p2, "second");
  auto pair = pair_symbolize(p1, p2);
  auto e1 = to_expression(pair.first);
  auto e2 = to_expression(pair.second);
  auto n1 = normalize(e1);
  auto n2 = normalize(e2);

  EquivResult r;
  r.canonical_first = describe(n1, pair.symbols);
  r.canonical_second = describe(n2, pair.symbols);
  if ((e1->kind == Expr::Kind::Greater) != (e2->kind == Expr::Kind::Greater)) {
    r.verdict = Verdict::IncomparableTypes;
    return r;
  }
  r.canonical_match = canonical_key(n1) == canonical_key(n2);
  if (use_canonical && r.canonical_match) {
    r.verdict = Verdict::Equivalent;
    return r;
  }
  auto s = sample_compare(e1, e2, pair.symbols.size(), options);
  r.points_checked = s.points;
  r.verdict = (s.result == Sampled::Agree && s.points > 0) ? Verdict::Equivalent
                                                          : Verdict::NotEquivalent;
  return r;
}

}  // namespace

EquivResult equivalent(const Program& p1, const Program& p2, const EquivOptions& options) {
  return decide(p1, p2, options, true);
}

EquivResult randomized_equivalent(const Program& p1, const Program& p2,
                                  const EquivOptions& options) {
  return decide(p1, p2, options, false);
}

bool program_accuracy(const Program& pred, const Program& gold, const EquivOptions& options) {
  ValidateOptions vo;
  vo.constants = &ConstantTable::permissive();
  if (has_errors(validate(pred, vo))) return false;
  return equivalent(pred, gold, options).equivalent();
}

bool program_accuracy(std::string_view pred_text, const Program& gold, const EquivOptions& options,
                      const ConstantTable& constants) {
  Program pred;
  try {
    ParseOptions po;
    po.constants = &constants;
    pred = parse_program(pred_text, po);
  } catch (const ParseError&) {
    return false;
  }
  return program_accuracy(pred, gold, options);
}

}  // namespace finqa
