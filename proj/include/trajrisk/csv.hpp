// Copyright 2026 The trajrisk Authors
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

#ifndef TRAJRISK_CSV_HPP_
#define TRAJRISK_CSV_HPP_

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trajrisk
{

// Full-precision decimal rendering; round-trips doubles exactly, which the
// byte-identical-rerun contract depends on.
inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string format_double(double v, int precision)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // 1-based line number of each row in the source file (skips comments/blanks)
  std::vector<int> line_numbers;

  std::optional<std::size_t> column(std::string_view name) const;
};

// Reads a delimited text file. Lines starting with '#' are metadata/comments
// and are skipped (output files carry a '# config_hash=... seed=...' line).
CsvTable read_csv(const std::string & path);

void write_text_file(const std::string & path, const std::string & content);
std::string read_text_file(const std::string & path);

bool parse_double(std::string_view s, double & out);
bool parse_long(std::string_view s, long long & out);

}  // namespace trajrisk

#endif  // TRAJRISK_CSV_HPP_
