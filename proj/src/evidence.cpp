#include "finqa/evidence.hpp"

#include <algorithm>
#include <cctype>

namespace finqa {

FinTable FinTable::from_matrix(const std::vector<std::vector<std::string>>& matrix) {
  FinTable t;
  if (matrix.empty()) return t;
  t.header = matrix.front();
  for (std::size_t i = 1; i < matrix.size(); ++i) {
    const auto& raw = matrix[i];
    Row row;
    if (!raw.empty()) {
      row.name = raw.front();
      row.cells.assign(raw.begin() + 1, raw.end());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string normalize_row_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char c : name) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || uc >= 0x80) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(uc));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::optional<Rational> cell_value(std::string_view cell) {
  if (auto q = try_parse_quantity(cell)) return q->mantissa;
  auto nums = extract_numbers(cell);
  if (nums.empty()) return std::nullopt;
  std::size_t lead = 0;
  while (lead < cell.size() && std::isspace(static_cast<unsigned char>(cell[lead]))) ++lead;
  if (nums.front().begin != lead) return std::nullopt;
  return nums.front().mantissa;
}

EvidenceContext::EvidenceContext(std::vector<std::string> text_sentences, FinTable table,
                                 std::string question)
    : sentences_(std::move(text_sentences)),
      table_(std::move(table)),
      question_(std::move(question)) {
  numbers_.reserve(sentences_.size());
  for (const auto& s : sentences_) numbers_.push_back(extract_numbers(s));
  row_keys_.reserve(table_.rows.size());
  for (const auto& r : table_.rows) row_keys_.push_back(normalize_row_name(r.name));
}

std::vector<std::size_t> EvidenceContext::find_rows(std::string_view name) const {
  std::vector<std::size_t> hits;
  auto key = normalize_row_name(name);
  for (std::size_t i = 0; i < row_keys_.size(); ++i)
    if (row_keys_[i] == key) hits.push_back(i);
  return hits;
}

std::vector<Rational> EvidenceContext::mentioned_numbers() const {
  std::vector<Rational> out;
  auto add = [&out](const Rational& v) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  for (const auto& nums : numbers_)
    for (const auto& q : nums) add(q.mantissa);
  for (const auto& h : table_.header)
    for (const auto& q : extract_numbers(h)) add(q.mantissa);
  for (const auto& row : table_.rows) {
    for (const auto& q : extract_numbers(row.name)) add(q.mantissa);
    for (const auto& c : row.cells)
      for (const auto& q : extract_numbers(c)) add(q.mantissa);
  }
  for (const auto& q : extract_numbers(question_)) add(q.mantissa);
  return out;
}

bool EvidenceContext::mentions(const Rational& value) const {
  for (const auto& nums : numbers_)
    for (const auto& q : nums)
      if (q.mantissa == value) return true;
  auto in_text = [&value](std::string_view s) {
    for (const auto& q : extract_numbers(s))
      if (q.mantissa == value) return true;
    return false;
  };
  for (const auto& h : table_.header)
    if (in_text(h)) return true;
  for (const auto& row : table_.rows) {
    if (in_text(row.name)) return true;
    for (const auto& c : row.cells)
      if (in_text(c)) return true;
  }
  return in_text(question_);
}

}  // namespace finqa
