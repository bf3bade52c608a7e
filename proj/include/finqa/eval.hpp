#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finqa/corpus.hpp"
#include "finqa/equiv.hpp"

namespace finqa {

/// One line of a prediction file. An absent program scores incorrect.
struct PredictionRecord {
  std::string id;
  std::optional<std::string> program_text;
  std::size_t line = 0;
};

class UnknownRecordId : public std::invalid_argument {
 public:
  explicit UnknownRecordId(const std::string& id) : std::invalid_argument("unknown record id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class PredictionFormatError : public std::runtime_error {
 public:
  PredictionFormatError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// `<id>\t<program>` per line. Blank lines are skipped; a line without a tab or
/// with an empty program marks the prediction absent; a repeated id throws.
std::vector<PredictionRecord> parse_predictions(std::string_view text);
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);

enum class FailureReason { None, Missing, Parse, Exec, Value, Equiv };

std::string_view failure_reason_name(FailureReason r);

struct RecordVerdict {
  std::string id;
  bool exe_correct = false;
  bool prog_correct = false;
  FailureReason exe_reason = FailureReason::None;
  FailureReason prog_reason = FailureReason::None;
  std::string detail;
  std::optional<Value> predicted;
};

struct BucketScore {
  std::string label;
  std::size_t count = 0;
  double execution_accuracy = 0;
  double program_accuracy = 0;
};

struct EvalReport {
  std::size_t records = 0;
  std::size_t predictions = 0;  // records with a non-absent prediction
  double execution_accuracy = 0;
  double program_accuracy = 0;
  std::vector<BucketScore> by_source;     // table-only / text-only / table-text / no-gold-facts
  std::vector<BucketScore> by_steps;      // 1 / 2 / >2
  std::vector<BucketScore> by_constants;  // with / without
  std::map<std::string, std::size_t> exe_failures;
  std::map<std::string, std::size_t> prog_failures;
  std::vector<RecordVerdict> verdicts;  // record order
};

struct EvalOptions {
  TolerancePolicy tolerance;
  ExecOptions exec;
  EquivOptions equiv;
  const ConstantTable* constants = &ConstantTable::permissive();
  std::size_t threads = 1;
};

/// Scores one prediction against its record.
RecordVerdict score_record(const EvidenceRecord& record, const std::optional<std::string>& program_text,
                           const EvalOptions& options = {});

/// Every record is scored; records without a prediction count incorrect.
/// Throws UnknownRecordId for a prediction whose id matches no record.
EvalReport breakdown_report(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                            const EvalOptions& options = {});

double execution_accuracy(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                          const EvalOptions& options = {});
double program_accuracy_corpus(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                               const EvalOptions& options = {});

/// Gold programs rendered as predictions.
std::vector<PredictionRecord> gold_predictions(const std::vector<EvidenceRecord>& records);

std::string format_report_table(const EvalReport& report);
std::string format_report_machine(const EvalReport& report);

}  // namespace finqa
