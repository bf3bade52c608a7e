#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finqa/corpus.hpp"
#include "finqa/kernels.hpp"

namespace finqa {

class EmptyCorpus : public std::invalid_argument {
 public:
  EmptyCorpus() : std::invalid_argument("cannot index an empty fact list") {}
};

class NoGoldFacts : public std::invalid_argument {
 public:
  NoGoldFacts() : std::invalid_argument("record has no gold facts") {}
};

/// Lowercase tokens split on every non-alphanumeric character.
std::vector<std::string> retrieval_tokens(std::string_view text);

/// Smoothed TF-IDF over one record's candidate facts: idf = ln((1+N)/(1+df)) + 1,
/// raw term counts, L2-normalized rows. Immutable once built.
class TfIdfIndex {
 public:
  std::size_t size() const { return facts_.size(); }
  const std::vector<Fact>& facts() const { return facts_; }
  /// Sorted vocabulary; column order of the weight rows.
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& document_frequency() const { return df_; }
  double idf(const std::string& term) const;
  /// Dense normalized weights of fact i, one entry per term.
  const double* weights(std::size_t i) const { return weights_.data() + i * terms_.size(); }

  /// Normalized query vector over this index's vocabulary.
  std::vector<double> query_vector(std::string_view text) const;

 private:
  friend TfIdfIndex build_index(std::vector<Fact> facts);
  std::vector<Fact> facts_;  // sorted by position
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::vector<double> weights_;
};

TfIdfIndex build_index(std::vector<Fact> facts);

struct ScoredFact {
  std::string id;
  double score = 0;
  std::size_t position = 0;
};

/// Non-increasing scores; equal scores keep document order.
using RankedFacts = std::vector<ScoredFact>;

RankedFacts rank(std::string_view question, const TfIdfIndex& index, std::size_t k,
                 kernels::Isa isa = kernels::preferred_isa());

double recall_at_k(const RankedFacts& ranked, const std::vector<std::string>& gold_ids, std::size_t k);

struct SingleOpResult {
  Program program;  // divide(n1, n2), with fewer arguments when numbers are missing
  std::optional<Value> value;
  std::string error;  // why no value was produced
};

/// First number of each of the two best-ranked facts, divided.
SingleOpResult single_op_answer(const EvidenceRecord& record, const TfIdfIndex& index);

struct RecordRetrieval {
  std::string id;
  RankedFacts ranked;
  std::optional<double> recall;  // empty when the record has no gold facts
};

struct RetrievalReport {
  std::size_t k = 0;
  std::vector<RecordRetrieval> records;
  std::size_t scored = 0;  // records with gold facts
  double mean_recall = 0;
};

RetrievalReport evaluate_retrieval(const std::vector<EvidenceRecord>& records, std::size_t k,
                                   std::size_t threads = 1);

struct SingleOpReport {
  std::vector<std::pair<std::string, SingleOpResult>> records;
  std::vector<bool> correct;
  double execution_accuracy = 0;
};

SingleOpReport evaluate_single_op(const std::vector<EvidenceRecord>& records, const TolerancePolicy& policy = {},
                                  std::size_t threads = 1);

}  // namespace finqa
