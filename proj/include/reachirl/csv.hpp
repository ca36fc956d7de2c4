// Copyright 2026 The reachirl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "reachirl/error.hpp"

namespace reachirl::csv {

// Shortest representation that parses back to the same double.
inline std::string format(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

struct Field {
  std::string_view text;
  int column;  // 1-based character column
};

inline std::vector<Field> split(std::string_view line) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
    out.push_back({line.substr(start, end - start), static_cast<int>(start) + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& source, int line, const Field& f) {
  std::string_view t = f.text;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.remove_suffix(1);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ParseError(source, line, f.column, "expected a number, got '" + std::string(f.text) + "'");
  }
  return value;
}

// Rows of numbers following one header line. The header must match exactly
// when `expected_header` is non-empty; every row must have `ncols` fields.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline Table read_numeric(const std::string& path, const std::vector<std::string>& allowed_headers,
                          bool require_finite = true) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open " + path);
  Table table;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path, 1, 1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (!allowed_headers.empty()) {
    bool ok = false;
    for (const auto& h : allowed_headers) ok = ok || (line == h);
    if (!ok) throw ParseError(path, 1, 1, "unexpected header '" + line + "'");
  }
  for (const auto& f : split(line)) table.header.emplace_back(f.text);
  const std::size_t ncols = table.header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != ncols) {
      const int col = fields.size() > ncols ? fields[ncols].column : static_cast<int>(line.size()) + 1;
      throw ParseError(path, line_no, col,
                       "expected " + std::to_string(ncols) + " columns, got " +
                           std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(ncols);
    for (const auto& f : fields) {
      const double v = parse_double(path, line_no, f);
      if (require_finite && !std::isfinite(v)) {
        throw ParseError(path, line_no, f.column, "non-finite value");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

}  // namespace reachirl::csv
