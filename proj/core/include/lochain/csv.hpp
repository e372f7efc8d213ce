// SPDX-License-Identifier: Apache-2.0

#ifndef LOCHAIN_CSV_HPP
#define LOCHAIN_CSV_HPP

#include <string>
#include <vector>

namespace lochain {

/// RFC-4180-style CSV document: header row plus string cells. Numeric cells
/// are formatted with shortest-round-trip precision so re-parsing reproduces
/// the original doubles exactly and reruns are byte-identical.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> row);
  std::string to_string() const;

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  static CsvTable parse(const std::string& text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest-round-trip decimal form of a double (std::to_chars).
std::string format_double(double v);

/// Exact inverse of format_double.
double parse_double(const std::string& s);

std::string csv_escape(const std::string& field);

}  // namespace lochain

#endif
