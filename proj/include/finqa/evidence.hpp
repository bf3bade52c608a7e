#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "finqa/numeric.hpp"

namespace finqa {

/// A financial table with a single header row. The first header cell is the
/// description header; the remaining cells label the value columns.
struct FinTable {
  struct Row {
    std::string name;
    std::vector<std::string> cells;
  };

  std::vector<std::string> header;
  std::vector<Row> rows;

  bool empty() const { return rows.empty(); }
  std::size_t value_columns() const { return header.empty() ? 0 : header.size() - 1; }

  /// Builds a table from a raw cell matrix whose first row is the header and
  /// whose first column holds row names.
  static FinTable from_matrix(const std::vector<std::vector<std::string>>& matrix);
};

/// Case-insensitive, punctuation- and whitespace-normalized row key.
std::string normalize_row_name(std::string_view name);

/// Numeric value of one cell, or nullopt for non-numeric cells ("n/a", "-").
/// A cell such as "5.2 ( 3.1 )" yields its leading number.
std::optional<Rational> cell_value(std::string_view cell);

/// Question evidence: text sentences plus one table.
class EvidenceContext {
 public:
  EvidenceContext() = default;
  EvidenceContext(std::vector<std::string> text_sentences, FinTable table,
                  std::string question = {});

  const std::vector<std::string>& text_sentences() const { return sentences_; }
  const FinTable& table() const { return table_; }
  const std::string& question() const { return question_; }
  const std::vector<std::vector<Quantity>>& sentence_numbers() const { return numbers_; }

  /// Indices of rows whose normalized name equals the normalized query, in
  /// table order.
  std::vector<std::size_t> find_rows(std::string_view name) const;

  /// True when `value` is written somewhere in the text, question, or table.
  bool mentions(const Rational& value) const;

  /// Every distinct number mentioned, in document order (text, table, question).
  std::vector<Rational> mentioned_numbers() const;

 private:
  std::vector<std::string> sentences_;
  FinTable table_;
  std::string question_;
  std::vector<std::vector<Quantity>> numbers_;
  std::vector<std::string> row_keys_;
};

}  // namespace finqa
