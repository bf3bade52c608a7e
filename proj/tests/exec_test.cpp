#include "finqa/exec.hpp"

#include <algorithm>

#include <gtest/gtest.h>

#include "support/support.hpp"

using namespace finqa;

namespace {

Rational dec(const char* s) { return *parse_decimal(s); }

EvidenceContext empty_ctx() { return EvidenceContext({}, FinTable{}, ""); }

ExecErrorKind error_of(std::string_view text, const EvidenceContext& ctx) {
  try {
    execute(parse_program_syntax(text), ctx);
  } catch (const ExecError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return ExecErrorKind::InvalidProgram;
}

FinTable rate_table() {
  return FinTable::from_matrix({{"", "2006", "2005", "2004"},
                                {"risk-free interest rate", "5%", "4.2%", "3.1%"},
                                {"volatility", "n/a", "—", ""},
                                {"shares", "(12)", "$1,500", "7"}});
}

}  // namespace

TEST(Execute, Examples) {
  auto ctx = empty_ctx();
  EXPECT_EQ(execute(parse_program("subtract(100, 25), divide(#0, 100)"), ctx), Value(dec("0.75")));
  EXPECT_EQ(execute(parse_program("greater(5, 3)"), ctx), Value(true));
  EXPECT_EQ(error_of("divide(5, 0)", ctx), ExecErrorKind::DivisionByZero);
}

TEST(EvalStep, Examples) {
  StepEnv env;
  EXPECT_EQ(eval_step(OpKind::Exp, {Rational(2), Rational(3)}, env), Value(Rational(8)));
  std::vector<Rational> row{Rational(1), Rational(2), Rational(3)};
  EXPECT_EQ(eval_step(OpKind::TableAverage, {row}, env), Value(Rational(2)));
  std::vector<Rational> mixed{Rational(5), Rational(-2), Rational(7)};
  EXPECT_EQ(eval_step(OpKind::TableMin, {mixed}, env), Value(Rational(-2)));
}

TEST(ResolveArgument, Examples) {
  EvidenceContext ctx({}, rate_table(), "");
  StepEnv env;
  EXPECT_EQ(std::get<Rational>(resolve_argument(Constant{"const_1000", Rational(1000)}, ctx, env)), 1000);
  env.push(Value(dec("11.64")));
  EXPECT_EQ(std::get<Rational>(resolve_argument(StepRef{0}, ctx, env)), dec("11.64"));
  auto cells = std::get<std::vector<Rational>>(resolve_argument(RowName{"risk-free interest rate"}, ctx, env));
  EXPECT_EQ(cells, (std::vector<Rational>{Rational(5), dec("4.2"), dec("3.1")}));
}

TEST(AggregateRow, Examples) {
  EXPECT_EQ(aggregate_row({Rational(10), Rational(20)}, Aggregate::Sum), 30);
  EXPECT_EQ(aggregate_row({Rational(10), Rational(20), Rational(30), Rational(40)}, Aggregate::Average), 25);
  EvidenceContext ctx({}, rate_table(), "");
  EXPECT_EQ(error_of("table-sum(volatility)", ctx), ExecErrorKind::EmptyNumericRow);
}

TEST(Execute, TableCells) {
  EvidenceContext ctx({}, rate_table(), "");
  EXPECT_EQ(execute(parse_program("table-sum(shares)"), ctx), Value(Rational(1495)));
  EXPECT_EQ(execute(parse_program("table-max(Shares)"), ctx), Value(Rational(1500)));
  EXPECT_EQ(error_of("table-sum(costs)", ctx), ExecErrorKind::RowNotFound);
}

TEST(Execute, ErrorKinds) {
  auto ctx = empty_ctx();
  EXPECT_EQ(error_of("greater(5, 3), add(#0, 1)", ctx), ExecErrorKind::BooleanInArithmetic);
  EXPECT_EQ(error_of("exp(-8, 0.5)", ctx), ExecErrorKind::DomainError);
  EXPECT_EQ(error_of("exp(0, -1)", ctx), ExecErrorKind::DivisionByZero);
  try {
    execute(parse_program("add(1, 2), divide(#0, 0)"), ctx);
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.step(), 1u);
  }
}

TEST(Execute, StrictGrounding) {
  EvidenceContext ctx({"sales were 40 ."}, FinTable{}, "");
  ExecOptions strict;
  strict.grounding = Grounding::Strict;
  EXPECT_EQ(execute(parse_program("divide(40, const_100)"), ctx, strict), Value(dec("0.4")));
  try {
    execute(parse_program("divide(41, 2)"), ctx, strict);
    FAIL();
  } catch (const ExecError& e) {
    EXPECT_EQ(e.kind(), ExecErrorKind::UngroundedNumber);
  }
  auto lenient = run(parse_program("divide(41, 2)"), ctx);
  EXPECT_EQ(lenient.answer, Value(dec("20.5")));
  EXPECT_FALSE(lenient.warnings.empty());
}

TEST(Execute, ExponentFallsBackToDouble) {
  auto ctx = empty_ctx();
  auto v = execute(parse_program("exp(2, 0.5)"), ctx).number();
  EXPECT_NEAR(to_double(v), 1.4142135623730951, 1e-15);
  EXPECT_EQ(execute(parse_program("exp(2, -2)"), ctx), Value(dec("0.25")));
}

TEST(Execute, MatchesNaiveInterpreter) {
  support::Rng rng(99);
  int errors = 0;
  for (int i = 0; i < 3000; ++i) {
    auto g = support::random_context(rng);
    auto p = support::random_program(rng, g);
    auto expected = support::naive_execute(p, g);
    try {
      auto got = execute(p, g.ctx);
      ASSERT_TRUE(expected.value) << render_program(p);
      ASSERT_EQ(got, *expected.value) << render_program(p);
    } catch (const ExecError& e) {
      ++errors;
      ASSERT_TRUE(expected.error) << render_program(p) << ": " << e.what();
      ASSERT_EQ(e.kind(), *expected.error) << render_program(p);
    }
  }
  EXPECT_LT(errors, 3000 / 2);
}

TEST(CellValue, GeneratedRenderingsParseBack) {
  support::Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    int decimals = static_cast<int>(rng() % 3);
    Rational v(static_cast<long>(rng() % 5'000'000) - 2'500'000, decimals == 0 ? 1 : decimals == 1 ? 10 : 100);
    auto text = support::render_cell(v, decimals, rng);
    auto parsed = cell_value(text);
    ASSERT_TRUE(parsed) << text;
    ASSERT_EQ(*parsed, v) << text;
  }
}

TEST(Properties, SumEqualsAverageTimesCount) {
  support::Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    std::vector<Rational> cells;
    const int n = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) cells.emplace_back(static_cast<long>(rng() % 20001) - 10000, 1 + static_cast<long>(rng() % 100));
    EXPECT_EQ(aggregate_row(cells, Aggregate::Sum), aggregate_row(cells, Aggregate::Average) * n);
    auto shuffled = cells;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto k : {Aggregate::Sum, Aggregate::Average, Aggregate::Max, Aggregate::Min})
      EXPECT_EQ(aggregate_row(cells, k), aggregate_row(shuffled, k));
    EXPECT_LE(aggregate_row(cells, Aggregate::Min), aggregate_row(cells, Aggregate::Average));
    EXPECT_LE(aggregate_row(cells, Aggregate::Average), aggregate_row(cells, Aggregate::Max));
  }
}

TEST(Properties, CommutativeStepsCommute) {
  support::Rng rng(12);
  auto ctx = empty_ctx();
  for (int i = 0; i < 500; ++i) {
    Rational a(static_cast<long>(rng() % 2001) - 1000, 1 + static_cast<long>(rng() % 50));
    Rational b(static_cast<long>(rng() % 2001) - 1000, 1 + static_cast<long>(rng() % 50));
    for (OpKind op : {OpKind::Add, OpKind::Multiply}) {
      Program ab{{OperationStep{op, {NumberLiteral{a}, NumberLiteral{b}}}}};
      Program ba{{OperationStep{op, {NumberLiteral{b}, NumberLiteral{a}}}}};
      EXPECT_EQ(execute(ab, ctx), execute(ba, ctx));
    }
  }
}

TEST(ValueText, BooleansAndNumbers) {
  EXPECT_EQ(Value(true).to_string(), "yes");
  EXPECT_EQ(Value(false).to_string(), "no");
  EXPECT_EQ(Value(dec("0.75")).to_string(), "0.75");
}
