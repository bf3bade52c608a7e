#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finqa/dsl.hpp"
#include "finqa/evidence.hpp"
#include "finqa/exec.hpp"

namespace finqa {

enum class FactSource { Text, Table };

/// A candidate supporting fact. Ids are `text:<i>` (index over pre_text then
/// post_text) or `row:<i>` (0-based data row).
struct Fact {
  std::string id;
  std::string content;
  FactSource source = FactSource::Text;
  std::size_t position = 0;  // document order
};

/// The gold answer as written, plus its parsed value.
struct GoldAnswer {
  std::string text;
  std::optional<Value> value;
  std::optional<int> decimals;  // displayed precision for numeric answers
};

/// Booleans must match exactly; numbers use values_equal with the gold
/// answer's displayed precision.
bool answer_matches(const Value& predicted, const GoldAnswer& gold, const TolerancePolicy& policy = {});

struct EvidenceRecord {
  std::string id;
  std::vector<std::string> pre_text;
  std::vector<std::string> post_text;
  FinTable table;
  std::string question;
  std::string gold_program_text;
  Program gold_program;
  GoldAnswer gold_answer;
  std::vector<std::string> gold_fact_ids;
  std::string filename;  // source report page, when present
  std::vector<std::string> warnings;

  /// Text sentences in fact order: pre_text then post_text.
  std::vector<std::string> text_sentences() const;
  EvidenceContext context() const;
};

class FileUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string record_id, std::string field_path, const std::string& message);
  const std::string& record_id() const { return record_id_; }
  const std::string& field_path() const { return field_path_; }

 private:
  std::string record_id_;
  std::string field_path_;
};

struct Reject {
  std::string record_id;
  std::size_t line = 0;  // 1-based line (JSON Lines) or array index + 1
  std::string field_path;
  std::string message;
};

struct LoadResult {
  std::vector<EvidenceRecord> records;
  std::vector<Reject> rejects;
};

struct LoadOptions {
  const ConstantTable* constants = &ConstantTable::permissive();
};

/// Reads a JSON Lines file (one record per line) or a JSON array of records.
/// Malformed records go to `rejects`; an empty or unreadable file throws.
LoadResult load_records(const std::filesystem::path& path, const LoadOptions& options = {});

/// Same as load_records, from in-memory text.
LoadResult parse_records(std::string_view text, const LoadOptions& options = {});

/// "the <row> of <column> is <cell> ;" clauses, one sentence per row.
std::vector<std::string> linearize_table(const FinTable& t);
std::string linearize_row(const FinTable& t, std::size_t row);

/// pre_text sentences, linearized rows, then post_text sentences.
std::vector<Fact> candidate_facts(const EvidenceRecord& r);

/// Source classification of a record's gold facts.
enum class SourceMix { TextOnly, TableOnly, Both, None };
SourceMix gold_source_mix(const EvidenceRecord& r);

/// A distribution as (label, count) pairs; percentages are count/total.
struct Distribution {
  std::vector<std::pair<std::string, std::size_t>> buckets;
  std::size_t total() const;
  double percent(const std::string& label) const;
};

struct StatsReport {
  std::size_t examples = 0;
  std::size_t report_pages = 0;
  double avg_text_sentences = 0;
  double avg_text_tokens = 0;
  double avg_table_rows = 0;
  double avg_table_tokens = 0;
  double avg_input_tokens = 0;
  std::size_t max_input_tokens = 0;
  double avg_question_tokens = 0;
  Distribution fact_sources;    // text-only / table-only / table-text
  Distribution fact_counts;     // 1 / 2 / >2
  Distribution fact_distances;  // <=3 / 4-6 / >6, records with more than one fact
  Distribution operations;      // per operation occurrence
  Distribution program_steps;   // 1 / 2 / >=3
};

StatsReport dataset_stats(const std::vector<EvidenceRecord>& records);

std::size_t whitespace_tokens(std::string_view s);

}  // namespace finqa
