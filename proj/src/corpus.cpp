#include "finqa/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace finqa {

using nlohmann::json;

SchemaError::SchemaError(std::string record_id, std::string field_path, const std::string& message)
    : std::runtime_error("record '" + record_id + "' field '" + field_path + "': " + message),
      record_id_(std::move(record_id)),
      field_path_(std::move(field_path)) {}

std::vector<std::string> EvidenceRecord::text_sentences() const {
  std::vector<std::string> out = pre_text;
  out.insert(out.end(), post_text.begin(), post_text.end());
  return out;
}

EvidenceContext EvidenceRecord::context() const {
  return EvidenceContext(text_sentences(), table, question);
}

namespace {

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class RecordReader {
 public:
  RecordReader(const json& j, const LoadOptions& options) : j_(j), opts_(options) {}

  EvidenceRecord read(const std::string& id, const json& qa) {
    EvidenceRecord r;
    r.id = id;
    r.pre_text = strings(j_, "pre_text");
    r.post_text = strings(j_, "post_text");
    r.table = table();
    if (j_.contains("filename") && j_["filename"].is_string()) r.filename = j_["filename"];

    r.question = string_field(qa, "qa.question", "question");
    r.gold_program_text = string_field(qa, "qa.program", "program");
    r.gold_program = program(r, r.gold_program_text);
    r.gold_answer = answer(qa);
    r.gold_fact_ids = gold_ids(r, qa);
    check_grounding(r);
    return r;
  }

  std::string id_;

 private:
  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw SchemaError(id_, path, msg);
  }

  std::vector<std::string> strings(const json& obj, const char* key) const {
    if (!obj.contains(key)) fail(key, "missing");
    const auto& v = obj[key];
    if (!v.is_array()) fail(key, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(std::string(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::string string_field(const json& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key)) fail(path, "missing");
    if (!obj[key].is_string()) fail(path, "expected a string");
    return obj[key].get<std::string>();
  }

  FinTable table() {
    if (!j_.contains("table")) fail("table", "missing");
    const auto& t = j_["table"];
    if (!t.is_array()) fail("table", "expected an array of rows");
    std::vector<std::vector<std::string>> matrix;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const std::string path = "table[" + std::to_string(i) + "]";
      if (!t[i].is_array()) fail(path, "expected an array of cells");
      std::vector<std::string> row;
      for (std::size_t k = 0; k < t[i].size(); ++k) {
        const auto& c = t[i][k];
        if (c.is_string())
          row.push_back(c.get<std::string>());
        else if (c.is_number())
          row.push_back(c.dump());
        else
          fail(path + "[" + std::to_string(k) + "]", "expected a string cell");
      }
      matrix.push_back(std::move(row));
    }
    auto table = FinTable::from_matrix(matrix);
    const std::size_t width = table.value_columns();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      auto& cells = table.rows[i].cells;
      if (cells.size() != width) {
        warnings_.push_back("table row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                            " value cells, header has " + std::to_string(width) + "; resized");
        cells.resize(width);
      }
    }
    return table;
  }

  Program program(EvidenceRecord& r, const std::string& text) {
    ParseOptions po;
    po.constants = opts_.constants;
    Program p;
    try {
      p = parse_program_syntax(text, po);
    } catch (const ParseError& e) {
      fail("qa.program", e.what());
    }
    if (auto n = strip_release_none(p))
      warnings_.push_back("dropped trailing 'none' argument of " + std::to_string(n) + " table step(s)");
    ValidateOptions vo;
    vo.constants = opts_.constants;
    auto ctx = r.context();
    vo.context = &ctx;
    for (const auto& d : validate(p, vo)) {
      bool fatal = d.severity == Severity::Error && d.kind != DiagnosticKind::UngroundedNumber;
      if (fatal) fail("qa.program", std::string(diagnostic_kind_name(d.kind)) + ": " + d.message);
      warnings_.push_back(std::string(diagnostic_kind_name(d.kind)) + ": " + d.message);
    }
    return p;
  }

  GoldAnswer answer(const json& qa) {
    GoldAnswer a;
    const json* v = nullptr;
    if (qa.contains("exe_ans")) v = &qa["exe_ans"];
    else if (qa.contains("answer")) v = &qa["answer"];
    if (!v) fail("qa.exe_ans", "missing");
    if (v->is_number()) {
      a.text = v->dump();
      if (auto r = parse_decimal(a.text)) {
        a.value = Value(*r);
        a.decimals = decimal_places(a.text);
      } else {
        a.value = Value(rational_from_double(v->get<double>()));
      }
      return a;
    }
    if (!v->is_string()) fail("qa.exe_ans", "expected a number or string");
    a.text = v->get<std::string>();
    auto t = normalize_row_name(a.text);
    if (t == "yes" || t == "true") {
      a.value = Value(true);
    } else if (t == "no" || t == "false") {
      a.value = Value(false);
    } else if (auto q = try_parse_quantity(a.text)) {
      a.value = Value(q->mantissa);
      a.decimals = q->decimals;
    } else {
      fail("qa.exe_ans", "cannot read answer '" + a.text + "'");
    }
    return a;
  }

  std::vector<std::string> gold_ids(const EvidenceRecord& r, const json& qa) {
    std::vector<std::string> raw;
    if (qa.contains("gold_inds")) {
      const auto& g = qa["gold_inds"];
      if (g.is_object()) {
        for (auto it = g.begin(); it != g.end(); ++it) raw.push_back(it.key());
      } else if (g.is_array()) {
        for (const auto& x : g) {
          if (!x.is_string()) fail("qa.gold_inds", "expected fact id strings");
          raw.push_back(x.get<std::string>());
        }
      } else {
        fail("qa.gold_inds", "expected an object or array");
      }
    }
    const std::size_t n_text = r.pre_text.size() + r.post_text.size();
    const std::size_t n_rows = r.table.rows.size();
    std::vector<std::string> out;
    for (const auto& id : raw) {
      std::string kind;
      std::size_t index = 0;
      auto sep = id.find_first_of("_:");
      if (sep == std::string::npos) fail("qa.gold_inds", "malformed fact id '" + id + "'");
      kind = id.substr(0, sep);
      try {
        index = std::stoul(id.substr(sep + 1));
      } catch (const std::exception&) {
        fail("qa.gold_inds", "malformed fact id '" + id + "'");
      }
      std::string mapped;
      if (kind == "text") {
        if (index >= n_text) fail("qa.gold_inds", "'" + id + "' is out of range");
        mapped = "text:" + std::to_string(index);
      } else if (kind == "table" && id[sep] == '_') {
        // release ids count the header as table_0
        if (index == 0) {
          warnings_.push_back("gold fact '" + id + "' is the table header; dropped");
          continue;
        }
        if (index - 1 >= n_rows) fail("qa.gold_inds", "'" + id + "' is out of range");
        mapped = "row:" + std::to_string(index - 1);
      } else if (kind == "row") {
        if (index >= n_rows) fail("qa.gold_inds", "'" + id + "' is out of range");
        mapped = "row:" + std::to_string(index);
      } else {
        fail("qa.gold_inds", "malformed fact id '" + id + "'");
      }
      if (std::find(out.begin(), out.end(), mapped) == out.end()) out.push_back(mapped);
    }
    // document order: pre_text, rows, post_text
    auto position = [&](const std::string& id) {
      auto i = std::stoul(id.substr(id.find(':') + 1));
      if (id[0] == 'r') return r.pre_text.size() + i;
      return i < r.pre_text.size() ? i : i + n_rows;
    };
    std::sort(out.begin(), out.end(),
              [&](const std::string& a, const std::string& b) { return position(a) < position(b); });
    return out;
  }

  void check_grounding(EvidenceRecord& r) {
    auto ctx = r.context();
    for (std::size_t i = 0; i < r.gold_program.steps.size(); ++i) {
      const auto& st = r.gold_program.steps[i];
      for (const auto& a : st.args) {
        if (const auto* lit = std::get_if<NumberLiteral>(&a)) {
          auto name = opts_.constants->name_for(lit->value);
          if (name && !ctx.mentions(lit->value))
            warnings_.push_back("ConstantSpelling: step " + std::to_string(i) + " literal " +
                                to_decimal_string(lit->value) + " is not in the evidence; read as " +
                                *name);
        }
        if (const auto* row = std::get_if<RowName>(&a)) {
          auto hits = ctx.find_rows(row->name);
          if (hits.empty()) continue;
          const auto& tr = r.table.rows[hits.front()];
          auto name_value = cell_value(tr.name);
          if (!name_value) continue;
          auto cells = row_numbers(tr);
          if (cells.empty()) continue;
          Aggregate kind = st.op == OpKind::TableSum       ? Aggregate::Sum
                           : st.op == OpKind::TableAverage ? Aggregate::Average
                           : st.op == OpKind::TableMax     ? Aggregate::Max
                                                           : Aggregate::Min;
          auto with = cells;
          with.insert(with.begin(), *name_value);
          if (aggregate_row(with, kind) != aggregate_row(cells, kind))
            warnings_.push_back("row name '" + tr.name +
                                "' is numeric; counting it would change step " + std::to_string(i));
        }
      }
    }
    r.warnings = std::move(warnings_);
    warnings_.clear();
  }

  const json& j_;
  const LoadOptions& opts_;
  std::vector<std::string> warnings_;
};

void read_object(const json& j, std::size_t line, const LoadOptions& options, LoadResult& out) {
  std::string id = j.is_object() && j.contains("id") && j["id"].is_string()
                       ? j["id"].get<std::string>()
                       : "#" + std::to_string(line);
  try {
    if (!j.is_object()) throw SchemaError(id, "", "expected an object");
    if (!j.contains("id") || !j["id"].is_string()) throw SchemaError(id, "id", "missing or not a string");
    std::vector<std::pair<std::string, const json*>> qas;
    if (j.contains("qa")) {
      qas.emplace_back(id, &j["qa"]);
    } else {
      for (int k = 0; k < 2; ++k) {
        std::string key = "qa_" + std::to_string(k);
        if (j.contains(key)) qas.emplace_back(id + "_" + std::to_string(k), &j[key]);
      }
    }
    if (qas.empty()) throw SchemaError(id, "qa", "missing");
    for (const auto& [qid, qa] : qas) {
      if (!qa->is_object()) throw SchemaError(qid, "qa", "expected an object");
      RecordReader reader(j, options);
      reader.id_ = qid;
      auto rec = reader.read(qid, *qa);
      if (qas.size() > 1) rec.warnings.insert(rec.warnings.begin(), "split from multi-question record " + id);
      out.records.push_back(std::move(rec));
    }
  } catch (const SchemaError& e) {
    out.rejects.push_back(Reject{e.record_id(), line, e.field_path(), e.what()});
  }
}

}  // namespace

LoadResult parse_records(std::string_view text, const LoadOptions& options) {
  LoadResult out;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw SchemaError("", "", "no records in input");

  if (text[first] == '[') {
    json arr;
    try {
      arr = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError("", "", std::string("invalid JSON: ") + e.what());
    }
    if (arr.empty()) throw SchemaError("", "", "no records in input");
    for (std::size_t i = 0; i < arr.size(); ++i) read_object(arr[i], i + 1, options, out);
    return out;
  }

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (trimmed(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      out.rejects.push_back(Reject{"#" + std::to_string(line_no), line_no, "", e.what()});
      continue;
    }
    read_object(j, line_no, options, out);
  }
  return out;
}

LoadResult load_records(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_records(ss.str(), options);
}

std::string linearize_row(const FinTable& t, std::size_t row) {
  const auto& r = t.rows.at(row);
  std::string out;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    auto cell = trimmed(r.cells[i]);
    if (cell.empty()) continue;
    std::string label = i + 1 < t.header.size() ? trimmed(t.header[i + 1]) : std::string();
    if (!out.empty()) out += ' ';
    out += "the " + r.name;
    if (!label.empty()) out += " of " + label;
    out += " is " + cell + " ;";
  }
  return out;
}

std::vector<std::string> linearize_table(const FinTable& t) {
  std::vector<std::string> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) out.push_back(linearize_row(t, i));
  return out;
}

std::vector<Fact> candidate_facts(const EvidenceRecord& r) {
  std::vector<Fact> out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < r.pre_text.size(); ++i)
    out.push_back(Fact{"text:" + std::to_string(i), r.pre_text[i], FactSource::Text, pos++});
  for (std::size_t i = 0; i < r.table.rows.size(); ++i)
    out.push_back(Fact{"row:" + std::to_string(i), linearize_row(r.table, i), FactSource::Table, pos++});
  for (std::size_t i = 0; i < r.post_text.size(); ++i)
    out.push_back(Fact{"text:" + std::to_string(r.pre_text.size() + i), r.post_text[i],
                       FactSource::Text, pos++});
  return out;
}

SourceMix gold_source_mix(const EvidenceRecord& r) {
  bool text = false, table = false;
  for (const auto& id : r.gold_fact_ids) {
    if (id.rfind("text:", 0) == 0) text = true;
    if (id.rfind("row:", 0) == 0) table = true;
  }
  if (text && table) return SourceMix::Both;
  if (text) return SourceMix::TextOnly;
  if (table) return SourceMix::TableOnly;
  return SourceMix::None;
}

std::size_t Distribution::total() const {
  std::size_t n = 0;
  for (const auto& b : buckets) n += b.second;
  return n;
}

double Distribution::percent(const std::string& label) const {
  auto n = total();
  if (n == 0) return 0;
  for (const auto& b : buckets)
    if (b.first == label) return 100.0 * static_cast<double>(b.second) / static_cast<double>(n);
  return 0;
}

std::size_t whitespace_tokens(std::string_view s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    bool sp = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!sp && !in) ++n;
    in = !sp;
  }
  return n;
}

StatsReport dataset_stats(const std::vector<EvidenceRecord>& records) {
  StatsReport s;
  s.examples = records.size();
  s.fact_sources.buckets = {{"text-only", 0}, {"table-only", 0}, {"table-text", 0}};
  s.fact_counts.buckets = {{"1", 0}, {"2", 0}, {">2", 0}};
  s.fact_distances.buckets = {{"<=3", 0}, {"4-6", 0}, {">6", 0}};
  for (OpKind op : kAllOps) s.operations.buckets.emplace_back(std::string(op_name(op)), 0);
  s.program_steps.buckets = {{"1", 0}, {"2", 0}, {">=3", 0}};
  if (records.empty()) return s;

  std::set<std::string> pages;
  std::size_t sentences = 0, text_tokens = 0, rows = 0, table_tokens = 0, question_tokens = 0;
  for (const auto& r : records) {
    pages.insert(r.filename.empty() ? "record:" + r.id : r.filename);
    std::size_t tt = 0, tb = 0;
    for (const auto& t : r.text_sentences()) tt += whitespace_tokens(t);
    for (const auto& h : r.table.header) tb += whitespace_tokens(h);
    for (const auto& row : r.table.rows) {
      tb += whitespace_tokens(row.name);
      for (const auto& c : row.cells) tb += whitespace_tokens(c);
    }
    sentences += r.pre_text.size() + r.post_text.size();
    text_tokens += tt;
    rows += r.table.rows.size();
    table_tokens += tb;
    s.max_input_tokens = std::max(s.max_input_tokens, tt + tb);
    question_tokens += whitespace_tokens(r.question);

    switch (gold_source_mix(r)) {
      case SourceMix::TextOnly: ++s.fact_sources.buckets[0].second; break;
      case SourceMix::TableOnly: ++s.fact_sources.buckets[1].second; break;
      case SourceMix::Both: ++s.fact_sources.buckets[2].second; break;
      case SourceMix::None: break;
    }
    const auto n_facts = r.gold_fact_ids.size();
    if (n_facts == 1) ++s.fact_counts.buckets[0].second;
    else if (n_facts == 2) ++s.fact_counts.buckets[1].second;
    else if (n_facts > 2) ++s.fact_counts.buckets[2].second;
    if (n_facts > 1) {
      auto facts = candidate_facts(r);
      std::size_t lo = facts.size(), hi = 0;
      for (const auto& f : facts) {
        if (std::find(r.gold_fact_ids.begin(), r.gold_fact_ids.end(), f.id) == r.gold_fact_ids.end())
          continue;
        lo = std::min(lo, f.position);
        hi = std::max(hi, f.position);
      }
      auto d = hi - lo;
      if (d <= 3) ++s.fact_distances.buckets[0].second;
      else if (d <= 6) ++s.fact_distances.buckets[1].second;
      else ++s.fact_distances.buckets[2].second;
    }
    for (const auto& st : r.gold_program.steps) ++s.operations.buckets[static_cast<std::size_t>(st.op)].second;
    auto steps = r.gold_program.steps.size();
    ++s.program_steps.buckets[steps == 1 ? 0 : steps == 2 ? 1 : 2].second;
  }
  const auto n = static_cast<double>(records.size());
  s.report_pages = pages.size();
  s.avg_text_sentences = static_cast<double>(sentences) / n;
  s.avg_text_tokens = static_cast<double>(text_tokens) / n;
  s.avg_table_rows = static_cast<double>(rows) / n;
  s.avg_table_tokens = static_cast<double>(table_tokens) / n;
  s.avg_input_tokens = static_cast<double>(text_tokens + table_tokens) / n;
  s.avg_question_tokens = static_cast<double>(question_tokens) / n;
  return s;
}

bool answer_matches(const Value& predicted, const GoldAnswer& gold, const TolerancePolicy& policy) {
  if (!gold.value) return false;
  if (predicted.is_boolean() || gold.value->is_boolean()) return predicted == *gold.value;
  return values_equal(predicted.number(), gold.value->number(), policy, gold.decimals);
}

}  // namespace finqa
