#include "finqa/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

using namespace finqa;

namespace {

const std::string kSample = std::string(FINQA_FIXTURES) + "/sample.jsonl";

std::vector<Fact> toy_facts() {
  return {Fact{"text:0", "Revenue grew", FactSource::Text, 0}, Fact{"text:1", "revenue fell", FactSource::Text, 1},
          Fact{"text:2", "costs fell sharply", FactSource::Text, 2}};
}

std::vector<std::string> ids(const RankedFacts& r) {
  std::vector<std::string> out;
  for (const auto& f : r) out.push_back(f.id);
  return out;
}

EvidenceRecord text_record(std::vector<std::string> sentences, std::string question) {
  EvidenceRecord r;
  r.id = "t";
  r.pre_text = std::move(sentences);
  r.question = std::move(question);
  return r;
}

}  // namespace

TEST(Tokens, LowercaseAlphanumericRuns) {
  EXPECT_EQ(retrieval_tokens("Net Revenue: $1,500.5 (2019)"),
            (std::vector<std::string>{"net", "revenue", "1", "500", "5", "2019"}));
  EXPECT_TRUE(retrieval_tokens(" ;- ").empty());
}

TEST(BuildIndex, HandComputedWeights) {
  auto idx = build_index(toy_facts());
  EXPECT_EQ(idx.terms(), (std::vector<std::string>{"costs", "fell", "grew", "revenue", "sharply"}));
  EXPECT_EQ(idx.document_frequency(), (std::vector<std::size_t>{1, 2, 1, 2, 1}));
  const double rare = std::log(4.0 / 2.0) + 1;    // df 1 of 3
  const double common = std::log(4.0 / 3.0) + 1;  // df 2 of 3
  EXPECT_DOUBLE_EQ(idx.idf("grew"), rare);
  EXPECT_DOUBLE_EQ(idx.idf("fell"), common);
  EXPECT_LT(idx.idf("revenue"), idx.idf("costs"));

  // fact 0 = (revenue: common, grew: rare) / norm
  const double n0 = std::sqrt(common * common + rare * rare);
  const double* w0 = idx.weights(0);
  EXPECT_DOUBLE_EQ(w0[3], common / n0);
  EXPECT_DOUBLE_EQ(w0[2], rare / n0);
  EXPECT_EQ(w0[0], 0.0);
  // fact 2 = (costs: rare, fell: common, sharply: rare) / norm
  const double n2 = std::sqrt(2 * rare * rare + common * common);
  EXPECT_DOUBLE_EQ(idx.weights(2)[1], common / n2);
  EXPECT_DOUBLE_EQ(idx.weights(2)[4], rare / n2);
}

TEST(BuildIndex, IdenticalFactsIdenticalVectors) {
  auto idx = build_index({Fact{"text:0", "a b b c", FactSource::Text, 0}, Fact{"text:1", "a b b c", FactSource::Text, 1},
                          Fact{"text:2", "d", FactSource::Text, 2}});
  for (std::size_t t = 0; t < idx.terms().size(); ++t) EXPECT_EQ(idx.weights(0)[t], idx.weights(1)[t]);
  double sq = 0;
  for (std::size_t t = 0; t < idx.terms().size(); ++t) sq += idx.weights(0)[t] * idx.weights(0)[t];
  EXPECT_NEAR(sq, 1.0, 1e-15);
}

TEST(BuildIndex, EmptyCorpus) { EXPECT_THROW(build_index({}), EmptyCorpus); }

TEST(Rank, HandComputedCosines) {
  auto idx = build_index(toy_facts());
  auto r = rank("revenue grew", idx, 10);
  ASSERT_EQ(ids(r), (std::vector<std::string>{"text:0", "text:1", "text:2"}));
  const double rare = std::log(2.0) + 1;
  const double common = std::log(4.0 / 3.0) + 1;
  EXPECT_NEAR(r[0].score, 1.0, 1e-12);
  // q . fact1 = common^2 / (|q| * common * sqrt(2))
  EXPECT_NEAR(r[1].score, common / (std::sqrt(2.0) * std::sqrt(common * common + rare * rare)), 1e-12);
  EXPECT_EQ(r[2].score, 0.0);

  EXPECT_EQ(ids(rank("sharply", idx, 1)), std::vector<std::string>{"text:2"});
}

TEST(Rank, TiesKeepDocumentOrder) {
  auto idx = build_index(toy_facts());
  EXPECT_EQ(ids(rank("nothing matches", idx, 3)), (std::vector<std::string>{"text:0", "text:1", "text:2"}));
  auto dup = build_index({Fact{"row:0", "x y", FactSource::Table, 5}, Fact{"text:0", "x y", FactSource::Text, 1}});
  EXPECT_EQ(ids(rank("x", dup, 2)), (std::vector<std::string>{"text:0", "row:0"}));
}

TEST(Kernels, ScalarAndSimdAgree) {
  if (!kernels::supported(kernels::Isa::Avx2)) GTEST_SKIP() << "no AVX2 on this machine";
#if defined(__x86_64__) || defined(__i386__)
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (std::size_t n = 0; n < 300; ++n) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
    }
    long double ref = 0;
    for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(a[i]) * b[i];
    const double s = kernels::dot_scalar(a.data(), b.data(), n);
    const double v = kernels::dot_avx2(a.data(), b.data(), n);
    EXPECT_EQ(s, v) << n;
    EXPECT_NEAR(v, static_cast<double>(ref), 1e-12) << n;
  }
#endif
}

TEST(Rank, SameRankingUnderEveryKernel) {
  auto loaded = load_records(kSample);
  for (const auto& r : loaded.records) {
    auto idx = build_index(candidate_facts(r));
    auto scalar = rank(r.question, idx, 100, kernels::Isa::Scalar);
    auto best = rank(r.question, idx, 100, kernels::preferred_isa());
    ASSERT_EQ(scalar.size(), best.size());
    for (std::size_t i = 0; i < scalar.size(); ++i) {
      EXPECT_EQ(scalar[i].id, best[i].id);
      EXPECT_NEAR(scalar[i].score, best[i].score, 1e-12);
    }
  }
}

TEST(Rank, InsertionOrderDoesNotMatter) {
  auto loaded = load_records(kSample);
  std::mt19937 rng(3);
  for (const auto& r : loaded.records) {
    auto facts = candidate_facts(r);
    auto expected = ids(rank(r.question, build_index(facts), facts.size()));
    for (int t = 0; t < 5; ++t) {
      std::shuffle(facts.begin(), facts.end(), rng);
      EXPECT_EQ(ids(rank(r.question, build_index(facts), facts.size())), expected) << r.id;
    }
  }
}

TEST(RecallAtK, Examples) {
  RankedFacts r{{"a", 0.9, 0}, {"b", 0.5, 1}, {"c", 0.1, 2}, {"d", 0.0, 3}};
  EXPECT_EQ(recall_at_k(r, {"a", "c"}, 3), 1.0);
  EXPECT_EQ(recall_at_k(r, {"d"}, 3), 0.0);
  EXPECT_EQ(recall_at_k(r, {"b", "d"}, 3), 0.5);
  EXPECT_EQ(recall_at_k(r, {"d"}, 10), 1.0);
  EXPECT_THROW(recall_at_k(r, {}, 3), NoGoldFacts);
}

TEST(RecallAtK, NonDecreasingInK) {
  auto loaded = load_records(kSample);
  for (const auto& r : loaded.records) {
    auto ranked = rank(r.question, build_index(candidate_facts(r)), 1000);
    double prev = 0;
    for (std::size_t k = 0; k <= ranked.size() + 1; ++k) {
      double now = recall_at_k(ranked, r.gold_fact_ids, k);
      EXPECT_GE(now, prev) << r.id << " k=" << k;
      prev = now;
    }
    EXPECT_EQ(prev, 1.0) << r.id;
  }
}

TEST(EvaluateRetrieval, ThreadCountDoesNotChangeReport) {
  auto loaded = load_records(kSample);
  auto one = evaluate_retrieval(loaded.records, 3, 1);
  auto four = evaluate_retrieval(loaded.records, 3, 4);
  EXPECT_EQ(one.scored, 20u);
  EXPECT_EQ(one.mean_recall, four.mean_recall);
  for (std::size_t i = 0; i < one.records.size(); ++i) EXPECT_EQ(ids(one.records[i].ranked), ids(four.records[i].ranked));
  EXPECT_LE(one.mean_recall, evaluate_retrieval(loaded.records, 5).mean_recall);
}

TEST(SingleOp, DividesFirstNumbersOfTopTwo) {
  auto r = text_record({"sales were 50 million , up from 40 .", "costs were 100 million .", "nothing here ."},
                       "sales sales costs");
  auto out = single_op_answer(r, build_index(candidate_facts(r)));
  EXPECT_EQ(render_program(out.program), "divide(50, 100)");
  ASSERT_TRUE(out.value);
  EXPECT_EQ(*out.value, Value(Rational(1, 2)));
}

TEST(SingleOp, MissingNumberDegrades) {
  auto r = text_record({"sales rose sharply .", "costs were 100 million ."}, "sales");
  auto out = single_op_answer(r, build_index(candidate_facts(r)));
  EXPECT_EQ(out.program.steps[0].args.size(), 1u);
  EXPECT_FALSE(out.value);
  EXPECT_FALSE(out.error.empty());

  auto zero = text_record({"sales were 5 .", "costs were 0 ."}, "sales costs");
  auto z = single_op_answer(zero, build_index(candidate_facts(zero)));
  EXPECT_FALSE(z.value);
}

TEST(SingleOp, ScoredOnSample) {
  auto loaded = load_records(kSample);
  auto report = evaluate_single_op(loaded.records);
  EXPECT_EQ(report.records.size(), 20u);
  EXPECT_GE(report.execution_accuracy, 0.0);
  EXPECT_LE(report.execution_accuracy, 1.0);
  EXPECT_EQ(evaluate_single_op(loaded.records, {}, 3).correct, report.correct);
}
