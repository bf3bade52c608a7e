#include "finqa/eval.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "finqa/parallel.hpp"
#include "json.hpp"

namespace finqa {

std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    PredictionRecord p;
    p.line = line_no;
    auto tab = line.find('\t');
    p.id = std::string(line.substr(0, tab));
    if (p.id.empty()) throw PredictionFormatError(line_no, "empty record id");
    if (tab != std::string_view::npos) {
      auto program = line.substr(tab + 1);
      if (program.find_first_not_of(" \t") != std::string_view::npos) p.program_text = std::string(program);
    }
    if (!seen.insert(p.id).second) throw PredictionFormatError(line_no, "duplicate record id '" + p.id + "'");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str());
}

std::string_view failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Missing: return "missing";
    case FailureReason::Parse: return "parse";
    case FailureReason::Exec: return "exec";
    case FailureReason::Value: return "value";
    case FailureReason::Equiv: return "equiv";
  }
  return "?";
}

RecordVerdict score_record(const EvidenceRecord& record, const std::optional<std::string>& program_text,
                           const EvalOptions& options) {
  RecordVerdict v;
  v.id = record.id;
  auto fail_both = [&](FailureReason r, std::string detail) {
    v.exe_reason = v.prog_reason = r;
    v.detail = std::move(detail);
    return v;
  };
  if (!program_text) return fail_both(FailureReason::Missing, "no prediction");

  Program p;
  try {
    ParseOptions po;
    po.constants = options.constants;
    po.release_syntax = true;
    p = parse_program(*program_text, po);
  } catch (const ParseError& e) {
    return fail_both(FailureReason::Parse, e.what());
  }

  try {
    v.predicted = execute(p, record.context(), options.exec);
    v.exe_correct = answer_matches(*v.predicted, record.gold_answer, options.tolerance);
    if (!v.exe_correct) {
      v.exe_reason = FailureReason::Value;
      v.detail = "got " + v.predicted->to_string() + ", gold " + record.gold_answer.text;
    }
  } catch (const std::exception& e) {
    v.exe_reason = FailureReason::Exec;
    v.detail = e.what();
  }

  v.prog_correct = program_accuracy(p, record.gold_program, options.equiv);
  if (!v.prog_correct) v.prog_reason = FailureReason::Equiv;
  return v;
}

namespace {

std::string source_label(const EvidenceRecord& r) {
  switch (gold_source_mix(r)) {
    case SourceMix::TableOnly: return "table-only";
    case SourceMix::TextOnly: return "text-only";
    case SourceMix::Both: return "table-text";
    case SourceMix::None: return "no-gold-facts";
  }
  return "?";
}

std::string steps_label(const EvidenceRecord& r) {
  auto n = r.gold_program.steps.size();
  return n <= 1 ? "1" : n == 2 ? "2" : ">2";
}

std::string constants_label(const EvidenceRecord& r) {
  for (const auto& s : r.gold_program.steps)
    for (const auto& a : s.args)
      if (std::holds_alternative<Constant>(a)) return "with constants";
  return "without constants";
}

std::vector<BucketScore> buckets(const std::vector<EvidenceRecord>& records, const std::vector<RecordVerdict>& verdicts,
                                 const std::vector<std::string>& order, std::string (*label)(const EvidenceRecord&)) {
  std::vector<BucketScore> out;
  for (const auto& l : order) out.push_back(BucketScore{l, 0, 0, 0});
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto l = label(records[i]);
    for (auto& b : out)
      if (b.label == l) {
        ++b.count;
        b.execution_accuracy += verdicts[i].exe_correct;
        b.program_accuracy += verdicts[i].prog_correct;
      }
  }
  std::vector<BucketScore> nonempty;
  for (auto& b : out)
    if (b.count) {
      b.execution_accuracy /= static_cast<double>(b.count);
      b.program_accuracy /= static_cast<double>(b.count);
      nonempty.push_back(b);
    }
  return nonempty;
}

}  // namespace

EvalReport breakdown_report(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                            const EvalOptions& options) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);
  std::vector<const PredictionRecord*> by_record(records.size(), nullptr);
  for (const auto& p : preds) {
    auto it = index.find(p.id);
    if (it == index.end()) throw UnknownRecordId(p.id);
    by_record[it->second] = &p;
  }

  EvalReport report;
  report.records = records.size();
  report.verdicts.resize(records.size());
  parallel_for(records.size(), options.threads, [&](std::size_t i) {
    std::optional<std::string> text;
    if (by_record[i]) text = by_record[i]->program_text;
    report.verdicts[i] = score_record(records[i], text, options);
  });

  std::size_t exe = 0, prog = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& v = report.verdicts[i];
    if (by_record[i] && by_record[i]->program_text) ++report.predictions;
    exe += v.exe_correct;
    prog += v.prog_correct;
    if (!v.exe_correct) ++report.exe_failures[std::string(failure_reason_name(v.exe_reason))];
    if (!v.prog_correct) ++report.prog_failures[std::string(failure_reason_name(v.prog_reason))];
  }
  if (!records.empty()) {
    report.execution_accuracy = static_cast<double>(exe) / static_cast<double>(records.size());
    report.program_accuracy = static_cast<double>(prog) / static_cast<double>(records.size());
  }
  report.by_source = buckets(records, report.verdicts, {"table-only", "text-only", "table-text", "no-gold-facts"},
                             source_label);
  report.by_steps = buckets(records, report.verdicts, {"1", "2", ">2"}, steps_label);
  report.by_constants = buckets(records, report.verdicts, {"with constants", "without constants"}, constants_label);
  return report;
}

double execution_accuracy(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                          const EvalOptions& options) {
  return breakdown_report(preds, records, options).execution_accuracy;
}

double program_accuracy_corpus(const std::vector<PredictionRecord>& preds, const std::vector<EvidenceRecord>& records,
                               const EvalOptions& options) {
  return breakdown_report(preds, records, options).program_accuracy;
}

std::vector<PredictionRecord> gold_predictions(const std::vector<EvidenceRecord>& records) {
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    out.push_back(PredictionRecord{records[i].id, render_program(records[i].gold_program), i + 1});
  return out;
}

namespace {

std::string pct(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100 * f);
  return buf;
}

void bucket_rows(std::ostringstream& os, const std::string& title, const std::vector<BucketScore>& bs) {
  os << title << "\n";
  for (const auto& b : bs) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-20s %6zu  %s  %s\n", b.label.c_str(), b.count,
                  pct(b.execution_accuracy).c_str(), pct(b.program_accuracy).c_str());
    os << buf;
  }
}

nlohmann::json buckets_json(const std::vector<BucketScore>& bs) {
  auto arr = nlohmann::json::array();
  for (const auto& b : bs)
    arr.push_back({{"label", b.label},
                   {"count", b.count},
                   {"execution_accuracy", b.execution_accuracy},
                   {"program_accuracy", b.program_accuracy}});
  return arr;
}

}  // namespace

std::string format_report_table(const EvalReport& r) {
  std::ostringstream os;
  os << "records      " << r.records << " (" << r.predictions << " predicted)\n";
  os << "exe acc      " << pct(r.execution_accuracy) << "%\n";
  os << "prog acc     " << pct(r.program_accuracy) << "%\n\n";
  os << "                         count  exe acc prog acc\n";
  bucket_rows(os, "fact source", r.by_source);
  bucket_rows(os, "program steps", r.by_steps);
  bucket_rows(os, "constants", r.by_constants);
  if (!r.exe_failures.empty() || !r.prog_failures.empty()) {
    os << "\nfailures\n";
    for (const auto& [k, n] : r.exe_failures) os << "  exe  " << k << " " << n << "\n";
    for (const auto& [k, n] : r.prog_failures) os << "  prog " << k << " " << n << "\n";
  }
  return os.str();
}

std::string format_report_machine(const EvalReport& r) {
  nlohmann::json j;
  j["records"] = r.records;
  j["predictions"] = r.predictions;
  j["execution_accuracy"] = r.execution_accuracy;
  j["program_accuracy"] = r.program_accuracy;
  j["breakdown"] = {{"fact_source", buckets_json(r.by_source)},
                    {"program_steps", buckets_json(r.by_steps)},
                    {"constants", buckets_json(r.by_constants)}};
  j["failures"] = {{"execution", r.exe_failures}, {"program", r.prog_failures}};
  auto verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) {
    nlohmann::json e{{"id", v.id},
                     {"exe_correct", v.exe_correct},
                     {"prog_correct", v.prog_correct},
                     {"exe_reason", failure_reason_name(v.exe_reason)},
                     {"prog_reason", failure_reason_name(v.prog_reason)}};
    if (v.predicted) e["predicted"] = v.predicted->to_string();
    if (!v.detail.empty()) e["detail"] = v.detail;
    verdicts.push_back(std::move(e));
  }
  j["verdicts"] = std::move(verdicts);
  return j.dump(2) + "\n";
}

}  // namespace finqa
