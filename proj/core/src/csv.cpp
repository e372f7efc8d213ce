// SPDX-License-Identifier: Apache-2.0

#include "lochain/csv.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace lochain {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: bad numeric field '" + s + "'");
  return v;
}

std::string csv_escape(const std::string& field) {
  const bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += "\r\n";
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

namespace {

std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_open = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && field_open) {
      quoted = true;
    } else if (c == '"' && !field_open) {
      quoted = true;
      field_open = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_open = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      field_open = false;
      records.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
      field_open = true;
    }
  }
  if (field_open || !row.empty()) {
    row.push_back(std::move(field));
    records.push_back(std::move(row));
  }
  return records;
}

}  // namespace

CsvTable CsvTable::parse(const std::string& text) {
  auto records = parse_records(text);
  if (records.empty()) throw std::invalid_argument("CsvTable::parse: empty document");
  CsvTable table(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) table.add_row(std::move(records[r]));
  return table;
}

}  // namespace lochain
