#include "finqa/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "finqa/eval.hpp"
#include "finqa/mask.hpp"
#include "finqa/retrieve.hpp"
#include "json.hpp"

namespace finqa {

namespace {

using nlohmann::json;

struct Settings {
  std::string records;
  std::string preds;
  std::string out;
  std::string format = "table";
  std::string id;
  std::size_t k = 3;
  std::size_t threads = 1;
  std::size_t max_steps = 5;
  double abs_tol = TolerancePolicy{}.abs_tol;
  double rel_tol = TolerancePolicy{}.rel_tol;
  bool percent_insensitive = false;
  bool strict_grounding = false;
  bool single_op = false;
  std::uint64_t seed = EquivOptions{}.seed;
  std::vector<std::string> programs;
};

// Raised for problems that map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Runner {
 public:
  Runner(const Settings& s, std::ostream& out, std::ostream& err) : s_(s), out_(out), err_(err) {}

  int validate();
  int exec();
  int equiv();
  int eval();
  int retrieve();
  int stats();
  int linearize();
  int mask();

 private:
  bool machine() const { return s_.format == "machine"; }

  TolerancePolicy tolerance() const {
    TolerancePolicy t;
    t.abs_tol = s_.abs_tol;
    t.rel_tol = s_.rel_tol;
    t.percent_insensitive = s_.percent_insensitive;
    return t;
  }

  ExecOptions exec_options() const {
    ExecOptions o;
    o.grounding = s_.strict_grounding ? Grounding::Strict : Grounding::Lenient;
    return o;
  }

  ParseOptions parse_options(bool symbolic) const {
    ParseOptions o;
    o.constants = &ConstantTable::permissive();
    o.symbolic = symbolic;
    o.release_syntax = true;
    return o;
  }

  const LoadResult& loaded() {
    if (s_.records.empty()) throw UsageError("--records is required");
    if (!loaded_) {
      loaded_ = load_records(s_.records);
      for (const auto& r : loaded_->rejects)
        err_ << "reject line " << r.line << " record '" << r.record_id << "' " << r.field_path << ": " << r.message
             << "\n";
    }
    return *loaded_;
  }

  const EvidenceRecord& record_by_id() {
    for (const auto& r : loaded().records)
      if (r.id == s_.id) return r;
    throw UsageError("no record with id '" + s_.id + "'");
  }

  int finish(const std::string& text, int code) {
    if (s_.out.empty()) {
      out_ << text;
    } else {
      std::ofstream f(s_.out, std::ios::binary);
      if (!f) throw UsageError("cannot write " + s_.out);
      f << text;
    }
    return code;
  }

  int rejects_code() { return loaded_ && !loaded_->rejects.empty() ? 1 : 0; }

  const Settings& s_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<LoadResult> loaded_;
};

std::string diagnostics_text(const std::vector<Diagnostic>& diags) {
  std::ostringstream os;
  for (const auto& d : diags)
    os << (d.severity == Severity::Error ? "error" : "warning") << " step " << d.step << " "
       << diagnostic_kind_name(d.kind) << ": " << d.message << "\n";
  return os.str();
}

int Runner::validate() {
  if (!s_.programs.empty()) {
    std::ostringstream os;
    bool bad = false;
    for (const auto& text : s_.programs) {
      try {
        ValidateOptions vo;
        vo.constants = &ConstantTable::permissive();
        auto diags = finqa::validate(parse_program_syntax(text, parse_options(false)), vo);
        bad |= has_errors(diags);
        os << (has_errors(diags) ? "invalid" : "valid") << "\t" << text << "\n" << diagnostics_text(diags);
      } catch (const ParseError& e) {
        bad = true;
        os << "invalid\t" << text << "\n" << e.what() << "\n";
      }
    }
    return finish(os.str(), bad ? 1 : 0);
  }
  const auto& l = loaded();
  if (machine()) {
    json j;
    j["records"] = l.records.size();
    j["rejects"] = json::array();
    for (const auto& r : l.rejects)
      j["rejects"].push_back({{"id", r.record_id}, {"line", r.line}, {"field", r.field_path}, {"message", r.message}});
    j["warnings"] = json::object();
    for (const auto& r : l.records)
      if (!r.warnings.empty()) j["warnings"][r.id] = r.warnings;
    return finish(j.dump(2) + "\n", rejects_code());
  }
  std::ostringstream os;
  std::size_t warned = 0;
  for (const auto& r : l.records)
    for (const auto& w : r.warnings) {
      os << r.id << "\twarning\t" << w << "\n";
      ++warned;
    }
  os << l.records.size() << " records loaded, " << l.rejects.size() << " rejected, " << warned << " warnings\n";
  return finish(os.str(), rejects_code());
}

int Runner::exec() {
  if (!s_.programs.empty()) {
    EvidenceContext ctx;
    if (!s_.id.empty()) ctx = record_by_id().context();
    std::ostringstream os;
    int code = 0;
    for (const auto& text : s_.programs) {
      try {
        auto result = run(parse_program(text, parse_options(false)), ctx, exec_options());
        os << result.answer.to_string() << "\n";
        for (const auto& w : result.warnings) err_ << "warning: " << w << "\n";
      } catch (const std::exception& e) {
        os << "error: " << e.what() << "\n";
        code = 1;
      }
    }
    return finish(os.str(), code);
  }

  // gold programs against stored answers
  const auto& records = loaded().records;
  EvalOptions opts;
  opts.tolerance = tolerance();
  opts.exec = exec_options();
  opts.threads = s_.threads;
  auto report = breakdown_report(gold_predictions(records), records, opts);
  std::size_t matched = 0;
  for (const auto& v : report.verdicts) matched += v.exe_correct;
  if (machine()) {
    json j{{"records", records.size()}, {"matched", matched}, {"mismatches", json::array()}};
    for (const auto& v : report.verdicts)
      if (!v.exe_correct) j["mismatches"].push_back({{"id", v.id}, {"reason", failure_reason_name(v.exe_reason)}, {"detail", v.detail}});
    return finish(j.dump(2) + "\n", rejects_code());
  }
  std::ostringstream os;
  for (const auto& v : report.verdicts)
    if (!v.exe_correct) os << v.id << "\t" << failure_reason_name(v.exe_reason) << "\t" << v.detail << "\n";
  os << matched << " of " << records.size() << " gold programs reproduce the stored answer\n";
  return finish(os.str(), rejects_code());
}

int Runner::equiv() {
  if (s_.programs.size() != 2) throw UsageError("equiv takes exactly two programs");
  Program a, b;
  try {
    a = parse_program(s_.programs[0], parse_options(true));
    b = parse_program(s_.programs[1], parse_options(true));
  } catch (const ParseError& e) {
    err_ << e.what() << "\n";
    return 1;
  }
  EquivOptions eo;
  eo.seed = s_.seed;
  auto r = equivalent(a, b, eo);
  if (machine()) {
    json j{{"verdict", verdict_name(r.verdict)},
           {"canonical_match", r.canonical_match},
           {"points_checked", r.points_checked},
           {"first", r.canonical_first},
           {"second", r.canonical_second}};
    return finish(j.dump(2) + "\n", 0);
  }
  std::ostringstream os;
  os << verdict_name(r.verdict) << "\n";
  if (!r.canonical_first.empty()) os << "  " << r.canonical_first << "\n  " << r.canonical_second << "\n";
  return finish(os.str(), 0);
}

int Runner::eval() {
  if (s_.preds.empty()) throw UsageError("--preds is required");
  const auto& records = loaded().records;
  auto preds = load_predictions(s_.preds);
  EvalOptions opts;
  opts.tolerance = tolerance();
  opts.exec = exec_options();
  opts.equiv.seed = s_.seed;
  opts.threads = s_.threads;
  auto report = breakdown_report(preds, records, opts);
  return finish(machine() ? format_report_machine(report) : format_report_table(report), rejects_code());
}

int Runner::retrieve() {
  const auto& records = loaded().records;
  auto report = evaluate_retrieval(records, s_.k, s_.threads);
  std::optional<SingleOpReport> single;
  if (s_.single_op) single = evaluate_single_op(records, tolerance(), s_.threads);

  if (machine()) {
    json j{{"k", report.k}, {"scored", report.scored}, {"recall", report.mean_recall}, {"records", json::array()}};
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      const auto& r = report.records[i];
      json e{{"id", r.id}, {"ranked", json::array()}};
      for (const auto& f : r.ranked) e["ranked"].push_back({{"id", f.id}, {"score", f.score}});
      if (r.recall) e["recall"] = *r.recall;
      if (single) {
        const auto& so = single->records[i].second;
        e["single_op"] = {{"program", render_program(so.program)}, {"correct", static_cast<bool>(single->correct[i])}};
      }
      j["records"].push_back(std::move(e));
    }
    if (single) j["single_op_execution_accuracy"] = single->execution_accuracy;
    return finish(j.dump(2) + "\n", rejects_code());
  }
  std::ostringstream os;
  for (const auto& r : report.records) {
    os << r.id;
    for (const auto& f : r.ranked) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", f.score);
      os << "\t" << f.id << ":" << buf;
    }
    os << "\n";
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "recall@%zu %.2f%% over %zu records\n", report.k, 100 * report.mean_recall,
                report.scored);
  os << buf;
  if (single) {
    std::snprintf(buf, sizeof buf, "single-op exe acc %.2f%%\n", 100 * single->execution_accuracy);
    os << buf;
  }
  return finish(os.str(), rejects_code());
}

json distribution_json(const Distribution& d) {
  json j = json::object();
  for (const auto& [label, n] : d.buckets) j[label] = {{"count", n}, {"percent", d.percent(label)}};
  return j;
}

int Runner::stats() {
  auto st = dataset_stats(loaded().records);
  std::vector<std::pair<std::string, const Distribution*>> dists{{"fact_sources", &st.fact_sources},
                                                                  {"fact_counts", &st.fact_counts},
                                                                  {"fact_distances", &st.fact_distances},
                                                                  {"operations", &st.operations},
                                                                  {"program_steps", &st.program_steps}};
  if (machine()) {
    json j{{"examples", st.examples},
           {"report_pages", st.report_pages},
           {"avg_text_sentences", st.avg_text_sentences},
           {"avg_text_tokens", st.avg_text_tokens},
           {"avg_table_rows", st.avg_table_rows},
           {"avg_table_tokens", st.avg_table_tokens},
           {"avg_input_tokens", st.avg_input_tokens},
           {"max_input_tokens", st.max_input_tokens},
           {"avg_question_tokens", st.avg_question_tokens}};
    for (const auto& [name, d] : dists) j[name] = distribution_json(*d);
    return finish(j.dump(2) + "\n", rejects_code());
  }
  std::ostringstream os;
  char buf[160];
  auto line = [&](const char* label, double v) {
    std::snprintf(buf, sizeof buf, "%-24s %.2f\n", label, v);
    os << buf;
  };
  os << "examples                 " << st.examples << "\n";
  os << "report pages             " << st.report_pages << "\n";
  line("avg text sentences", st.avg_text_sentences);
  line("avg text tokens", st.avg_text_tokens);
  line("avg table rows", st.avg_table_rows);
  line("avg table tokens", st.avg_table_tokens);
  line("avg input tokens", st.avg_input_tokens);
  os << "max input tokens         " << st.max_input_tokens << "\n";
  line("avg question tokens", st.avg_question_tokens);
  for (const auto& [name, d] : dists) {
    os << "\n" << name << "\n";
    for (const auto& [label, n] : d->buckets) {
      std::snprintf(buf, sizeof buf, "  %-16s %8zu  %6.2f%%\n", label.c_str(), n, d->percent(label));
      os << buf;
    }
  }
  return finish(os.str(), rejects_code());
}

int Runner::linearize() {
  const auto& records = loaded().records;
  json j = json::array();
  std::ostringstream os;
  for (const auto& r : records) {
    if (!s_.id.empty() && r.id != s_.id) continue;
    for (const auto& f : candidate_facts(r)) {
      if (machine())
        j.push_back({{"record", r.id}, {"fact", f.id}, {"content", f.content}});
      else
        os << r.id << "\t" << f.id << "\t" << f.content << "\n";
    }
  }
  return finish(machine() ? j.dump(2) + "\n" : os.str(), rejects_code());
}

int Runner::mask() {
  if (s_.id.empty()) throw UsageError("mask needs --records and --id");
  const auto& r = record_by_id();
  auto vocab = build_vocabulary(r.context(), s_.max_steps, ConstantTable::permissive());
  std::string prefix = s_.programs.empty() ? "" : s_.programs[0];
  DecodeState state;
  try {
    for (auto t : tokenize_prefix(prefix, vocab)) state = advance(state, t, vocab);
  } catch (const std::exception& e) {
    err_ << "prefix rejected: " << e.what() << "\n";
    return 1;
  }
  auto m = next_token_mask(state, vocab);
  std::vector<std::string> allowed;
  for (TokenId i = 0; i < m.size(); ++i)
    if (m[i]) allowed.push_back(vocab[i].text);
  if (machine()) return finish(json{{"prefix", prefix}, {"allowed", allowed}}.dump(2) + "\n", 0);
  std::ostringstream os;
  for (const auto& a : allowed) os << a << "\n";
  return finish(os.str(), 0);
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Financial reasoning program toolkit", "finqa"};
  app.require_subcommand(1);
  Settings s;

  auto add_records = [&](CLI::App* c) { c->add_option("--records", s.records, "records file (JSON Lines or JSON array)"); };
  auto add_output = [&](CLI::App* c) {
    c->add_option("--out", s.out, "write the report here instead of stdout");
    c->add_option("--format", s.format, "table or machine")->check(CLI::IsMember({"table", "machine"}));
  };
  auto add_tolerance = [&](CLI::App* c) {
    c->add_option("--abs-tol", s.abs_tol, "absolute tolerance");
    c->add_option("--rel-tol", s.rel_tol, "relative tolerance");
    c->add_flag("--percent-insensitive", s.percent_insensitive, "accept answers off by a factor of 100");
    c->add_flag("--strict-grounding", s.strict_grounding, "reject literals absent from the evidence");
    c->add_option("--threads", s.threads, "worker threads, 0 for all cores");
  };

  auto* validate = app.add_subcommand("validate", "check programs or a records file");
  validate->add_option("programs", s.programs, "program texts");
  add_records(validate);
  add_output(validate);

  auto* exec = app.add_subcommand("exec", "execute programs, or every gold program of a records file");
  exec->add_option("programs", s.programs, "program texts");
  exec->add_option("--id", s.id, "record whose evidence the programs run against");
  add_records(exec);
  add_output(exec);
  add_tolerance(exec);

  auto* equiv = app.add_subcommand("equiv", "compare two programs for mathematical equivalence");
  equiv->add_option("programs", s.programs, "two program texts")->expected(2);
  equiv->add_option("--seed", s.seed, "seed of the randomized fallback");
  add_output(equiv);

  auto* eval = app.add_subcommand("eval", "score predictions against gold answers and programs");
  add_records(eval);
  eval->add_option("--preds", s.preds, "prediction file: <id> TAB <program> per line");
  eval->add_option("--seed", s.seed, "seed of the randomized equivalence fallback");
  add_output(eval);
  add_tolerance(eval);

  auto* retrieve = app.add_subcommand("retrieve", "TF-IDF ranking and recall@k");
  add_records(retrieve);
  retrieve->add_option("--k", s.k, "facts kept per record");
  retrieve->add_flag("--single-op", s.single_op, "also score the divide-first-numbers baseline");
  add_output(retrieve);
  add_tolerance(retrieve);

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  add_records(stats);
  add_output(stats);

  auto* linearize = app.add_subcommand("linearize", "candidate facts with table rows as sentences");
  add_records(linearize);
  linearize->add_option("--id", s.id, "only this record");
  add_output(linearize);

  auto* mask = app.add_subcommand("mask", "tokens allowed after a program prefix");
  mask->add_option("programs", s.programs, "program prefix")->expected(0, 1);
  add_records(mask);
  mask->add_option("--id", s.id, "record providing the vocabulary");
  mask->add_option("--max-steps", s.max_steps, "step memory size");
  add_output(mask);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  Runner runner(s, out, err);
  try {
    if (*validate) return runner.validate();
    if (*exec) return runner.exec();
    if (*equiv) return runner.equiv();
    if (*eval) return runner.eval();
    if (*retrieve) return runner.retrieve();
    if (*stats) return runner.stats();
    if (*linearize) return runner.linearize();
    if (*mask) return runner.mask();
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const FileUnreadable& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const PredictionFormatError& e) {
    err << "predictions " << e.what() << "\n";
    return 2;
  } catch (const UnknownRecordId& e) {
    err << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace finqa
