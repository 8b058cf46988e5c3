// Copyright 2026 The PLOD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plod/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "plod/error.hpp"

namespace plod {

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (end > p && (end[-1] == '\r' || end[-1] == ' ')) --end;
  while (p <= end) {
    while (p < end && *p == ' ') ++p;
    const char* comma = std::find(p, end, ',');
    const char* stop = comma;
    while (stop > p && stop[-1] == ' ') --stop;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p, stop, v);
    if (ec != std::errc() || ptr != stop) return false;
    out.push_back(v);
    if (comma == end) break;
    p = comma + 1;
  }
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Matrix>& m,
                      std::span<const std::string> header) {
  if (!header.empty()) {
    if (static_cast<Index>(header.size()) != m.cols()) {
      raise(ErrorCode::kDimensionMismatch, "CSV header does not match the column count");
    }
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(r, c));
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const Matrix>& m,
                      std::span<const std::string> header) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
  write_matrix_csv(out, m, header);
  if (!out) raise(ErrorCode::kIoError, "write failed for " + path.string());
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::string line;
  bool first = true;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;
      }
      raise(ErrorCode::kParseError, "CSV line " + std::to_string(lineno) + " is not numeric");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      raise(ErrorCode::kParseError, "CSV line " + std::to_string(lineno) + " has a different width");
    }
    rows.push_back(row);
  }
  if (rows.empty()) raise(ErrorCode::kParseError, "CSV has no data rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::kIoError, "cannot open " + path.string());
  return read_matrix_csv(in);
}

}  // namespace plod
