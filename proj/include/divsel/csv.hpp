// Copyright 2026 The Authors.
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

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "divsel/error.hpp"
#include "divsel/numeric.hpp"

namespace divsel {

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;  // header order, response removed
  std::string response_name;
};

struct SideInfo {
  std::vector<std::string> names;
  Matrix profiles;  // one row per feature
};

namespace csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    const std::string_view cell(line.data() + start, (pos == std::string::npos ? line.size() : pos) - start);
    out.emplace_back(trim(cell));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string location(std::size_t row, std::size_t col, const std::string& name) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col, const std::string& name) {
  if (cell.empty()) throw DataError("csv: missing value at " + location(row, col, name));
  double v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw DataError("csv: non-numeric cell '" + cell + "' at " + location(row, col, name));
  }
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline Table read(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (t.header.empty()) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DataError("csv: " + source + " line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw DataError("csv: " + source + " has no header row");
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  return read(in, "'" + path + "'");
}

}  // namespace csv

inline Dataset parse_dataset(const csv::Table& t, const std::string& response_column) {
  std::size_t resp = t.header.size();
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == response_column) resp = j;
  }
  if (resp == t.header.size()) throw DataError("csv: response column '" + response_column + "' not in header");
  if (t.header.size() < 2) throw DataError("csv: need at least one feature column besides the response");
  if (t.rows.empty()) throw DataError("csv: no data rows");
  Dataset d;
  d.response_name = response_column;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j != resp) d.feature_names.push_back(t.header[j]);
  }
  const auto n = static_cast<Index>(t.rows.size());
  const auto m = static_cast<Index>(d.feature_names.size());
  d.x.resize(n, m);
  d.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    const std::size_t line = t.line_numbers[static_cast<std::size_t>(i)];
    Index c = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double v = csv::parse_cell(row[j], line, j, t.header[j]);
      if (j == resp) {
        d.y(i) = v;
      } else {
        d.x(i, c++) = v;
      }
    }
  }
  return d;
}

// Rows to predict: the named feature columns in the given order, plus the
// response when the header has it (y is then filled, otherwise empty).
inline Dataset parse_design(const csv::Table& t, const std::vector<std::string>& features,
                            const std::string& response_column) {
  if (t.rows.empty()) throw DataError("csv: no data rows");
  std::vector<std::size_t> cols;
  for (const auto& f : features) {
    const auto it = std::find(t.header.begin(), t.header.end(), f);
    if (it == t.header.end()) throw DataError("csv: feature column '" + f + "' not in header");
    cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  const auto rit = std::find(t.header.begin(), t.header.end(), response_column);
  Dataset d;
  d.feature_names = features;
  const auto n = static_cast<Index>(t.rows.size());
  d.x.resize(n, static_cast<Index>(features.size()));
  if (rit != t.header.end()) {
    d.response_name = response_column;
    d.y.resize(n);
  }
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    const std::size_t line = t.line_numbers[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      d.x(i, static_cast<Index>(c)) = csv::parse_cell(row[cols[c]], line, cols[c], t.header[cols[c]]);
    }
    if (rit != t.header.end()) {
      const auto j = static_cast<std::size_t>(rit - t.header.begin());
      d.y(i) = csv::parse_cell(row[j], line, j, t.header[j]);
    }
  }
  return d;
}

// Header row, comma-delimited numeric cells; every cell is required.
inline Dataset ingest_csv(const std::string& path, const std::string& response_column) {
  return parse_dataset(csv::read_file(path), response_column);
}

inline Dataset ingest_csv_text(const std::string& text, const std::string& response_column) {
  std::istringstream in(text);
  return parse_dataset(csv::read(in, "<text>"), response_column);
}

// First column names the feature; the rest is its profile.
inline SideInfo parse_side_info(const csv::Table& t) {
  if (t.header.size() < 2) throw DataError("side info: need a name column and at least one profile column");
  SideInfo s;
  const auto n = static_cast<Index>(t.rows.size());
  s.profiles.resize(n, static_cast<Index>(t.header.size() - 1));
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    s.names.push_back(row[0]);
    for (std::size_t j = 1; j < row.size(); ++j) {
      s.profiles(i, static_cast<Index>(j - 1)) =
          csv::parse_cell(row[j], t.line_numbers[static_cast<std::size_t>(i)], j, t.header[j]);
    }
  }
  return s;
}

inline SideInfo read_side_info(const std::string& path) { return parse_side_info(csv::read_file(path)); }

// Rows of the profile matrix permuted into `order`; every name must appear once.
inline Matrix align_side_info(const SideInfo& s, const std::vector<std::string>& order) {
  std::unordered_map<std::string, Index> pos;
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    if (!pos.emplace(s.names[i], static_cast<Index>(i)).second) {
      throw DataError("side info: duplicate feature name '" + s.names[i] + "'");
    }
  }
  if (s.names.size() != order.size()) {
    throw DataError("side info: " + std::to_string(s.names.size()) + " rows for " + std::to_string(order.size()) +
                    " features");
  }
  Matrix out(static_cast<Index>(order.size()), s.profiles.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = pos.find(order[i]);
    if (it == pos.end()) throw DataError("side info: no row for feature '" + order[i] + "'");
    out.row(static_cast<Index>(i)) = s.profiles.row(it->second);
  }
  return out;
}

}  // namespace divsel
