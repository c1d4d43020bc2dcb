// CSV formatting/parsing helpers shared by the scenario runner and tests.
// Numbers are written in 9-significant-digit scientific notation with '.'
// as the decimal point; files use ',' delimiters and LF line endings. NaN
// cells are written as empty strings (missing values).
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsim::csv {

inline std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return std::string(buf);
}

inline std::string format_or_blank(double v) {
  return std::isnan(v) ? std::string() : format(v);
}

inline double parse_number(const std::string& cell) {
  if (cell.empty()) return std::nan("");
  size_t used = 0;
  const double v = std::stod(cell, &used);
  if (used != cell.size())
    throw std::invalid_argument("csv: trailing junk in numeric cell '" + cell + "'");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  double number(size_t row, size_t col) const { return parse_number(rows[row][col]); }

  size_t column(const std::string& name) const {
    for (size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw std::invalid_argument("csv: no column named '" + name + "'");
  }
};

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      table.header = split_line(line);
      first = false;
    } else if (!line.empty()) {
      table.rows.push_back(split_line(line));
    }
  }
  if (first) throw std::runtime_error("csv: empty file '" + path + "'");
  return table;
}

}  // namespace vsim::csv
