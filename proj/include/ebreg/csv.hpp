// Copyright 2026 The ebreg Authors
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

#ifndef EBREG_CSV_HPP
#define EBREG_CSV_HPP

#include <string>
#include <vector>

namespace ebreg::csv {

// Shortest round-trip decimal form of v, so rewritten files are
// byte-stable and parse back to the identical double.
std::string format_double(double v);

// Parses a full double; context goes into the error message.
double parse_double(const std::string& s, const std::string& context);

struct Table {
  std::vector<std::string> comments;  // leading '#' lines, kept verbatim
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Throws ConfigError naming the 1-based line for malformed content.
Table read_table(const std::string& path);

// Writes to a temp file in the same directory, then renames into place.
void write_table(const std::string& path, const Table& table);

}  // namespace ebreg::csv

#endif  // EBREG_CSV_HPP
