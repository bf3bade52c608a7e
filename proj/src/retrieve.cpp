#include "finqa/retrieve.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "finqa/parallel.hpp"

namespace finqa {

std::vector<std::string> retrieval_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

std::map<std::string, std::size_t> term_counts(std::string_view text) {
  std::map<std::string, std::size_t> counts;
  for (auto& t : retrieval_tokens(text)) ++counts[t];
  return counts;
}

void normalize(double* v, std::size_t n) {
  double sq = 0;
  for (std::size_t i = 0; i < n; ++i) sq += v[i] * v[i];
  if (sq == 0) return;
  const double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < n; ++i) v[i] /= norm;
}

}  // namespace

TfIdfIndex build_index(std::vector<Fact> facts) {
  if (facts.empty()) throw EmptyCorpus();
  std::stable_sort(facts.begin(), facts.end(), [](const Fact& a, const Fact& b) {
    return a.position != b.position ? a.position < b.position : a.id < b.id;
  });

  TfIdfIndex idx;
  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  for (const auto& f : facts) {
    counts.push_back(term_counts(f.content));
    for (const auto& [term, n] : counts.back()) ++df[term];
  }
  for (const auto& [term, n] : df) {
    idx.terms_.push_back(term);
    idx.df_.push_back(n);
  }
  const double n_docs = static_cast<double>(facts.size());
  for (auto d : idx.df_) idx.idf_.push_back(std::log((1 + n_docs) / (1 + static_cast<double>(d))) + 1);

  const std::size_t v = idx.terms_.size();
  idx.weights_.assign(facts.size() * v, 0.0);
  for (std::size_t i = 0; i < facts.size(); ++i) {
    double* row = idx.weights_.data() + i * v;
    for (const auto& [term, n] : counts[i]) {
      auto col = static_cast<std::size_t>(std::lower_bound(idx.terms_.begin(), idx.terms_.end(), term) - idx.terms_.begin());
      row[col] = static_cast<double>(n) * idx.idf_[col];
    }
    normalize(row, v);
  }
  idx.facts_ = std::move(facts);
  return idx;
}

double TfIdfIndex::idf(const std::string& term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
  if (it == terms_.end() || *it != term) return 0;
  return idf_[static_cast<std::size_t>(it - terms_.begin())];
}

std::vector<double> TfIdfIndex::query_vector(std::string_view text) const {
  std::vector<double> q(terms_.size(), 0.0);
  for (const auto& [term, n] : term_counts(text)) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
    if (it == terms_.end() || *it != term) continue;
    auto col = static_cast<std::size_t>(it - terms_.begin());
    q[col] = static_cast<double>(n) * idf_[col];
  }
  normalize(q.data(), q.size());
  return q;
}

RankedFacts rank(std::string_view question, const TfIdfIndex& index, std::size_t k, kernels::Isa isa) {
  auto dot = kernels::dot_for(isa);
  auto q = index.query_vector(question);
  const auto& facts = index.facts();
  RankedFacts all;
  all.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i)
    all.push_back(ScoredFact{facts[i].id, dot(q.data(), index.weights(i), q.size()), facts[i].position});
  std::stable_sort(all.begin(), all.end(), [](const ScoredFact& a, const ScoredFact& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.position < b.position;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

double recall_at_k(const RankedFacts& ranked, const std::vector<std::string>& gold_ids, std::size_t k) {
  if (gold_ids.empty()) throw NoGoldFacts();
  const std::size_t top = std::min(k, ranked.size());
  std::size_t hit = 0;
  for (const auto& g : gold_ids)
    if (std::any_of(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top),
                    [&](const ScoredFact& f) { return f.id == g; }))
      ++hit;
  return static_cast<double>(hit) / static_cast<double>(gold_ids.size());
}

SingleOpResult single_op_answer(const EvidenceRecord& record, const TfIdfIndex& index) {
  SingleOpResult out;
  OperationStep step{OpKind::Divide, {}};
  for (const auto& f : rank(record.question, index, 2)) {
    auto it = std::find_if(index.facts().begin(), index.facts().end(), [&](const Fact& x) { return x.id == f.id; });
    auto numbers = extract_numbers(it->content);
    if (!numbers.empty()) step.args.push_back(NumberLiteral{numbers.front().mantissa});
  }
  out.program.steps.push_back(std::move(step));
  if (out.program.steps[0].args.size() < 2) {
    out.error = "fewer than two numbers in the top facts";
    return out;
  }
  try {
    out.value = execute(out.program, record.context());
  } catch (const ExecError& e) {
    out.error = e.what();
  }
  return out;
}

RetrievalReport evaluate_retrieval(const std::vector<EvidenceRecord>& records, std::size_t k, std::size_t threads) {
  RetrievalReport report;
  report.k = k;
  report.records.resize(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const auto& r = records[i];
    auto& out = report.records[i];
    out.id = r.id;
    auto facts = candidate_facts(r);
    if (facts.empty()) {
      if (!r.gold_fact_ids.empty()) out.recall = 0.0;
      return;
    }
    out.ranked = rank(r.question, build_index(std::move(facts)), k);
    if (!r.gold_fact_ids.empty()) out.recall = recall_at_k(out.ranked, r.gold_fact_ids, k);
  });
  double sum = 0;
  for (const auto& r : report.records)
    if (r.recall) {
      ++report.scored;
      sum += *r.recall;
    }
  report.mean_recall = report.scored ? sum / static_cast<double>(report.scored) : 0.0;
  return report;
}

SingleOpReport evaluate_single_op(const std::vector<EvidenceRecord>& records, const TolerancePolicy& policy,
                                  std::size_t threads) {
  SingleOpReport report;
  report.records.resize(records.size());
  report.correct.assign(records.size(), false);
  std::vector<char> correct(records.size(), 0);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const auto& r = records[i];
    report.records[i].first = r.id;
    auto facts = candidate_facts(r);
    if (facts.empty()) {
      report.records[i].second.error = "no candidate facts";
      return;
    }
    auto result = single_op_answer(r, build_index(std::move(facts)));
    correct[i] = result.value && answer_matches(*result.value, r.gold_answer, policy);
    report.records[i].second = std::move(result);
  });
  std::size_t hits = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.correct[i] = correct[i] != 0;
    hits += correct[i] != 0;
  }
  report.execution_accuracy = records.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(records.size());
  return report;
}

}  // namespace finqa
