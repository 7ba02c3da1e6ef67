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

#include "ebreg/synthdata.hpp"

#include <cmath>
#include <numeric>

#include "ebreg/csv.hpp"

namespace ebreg {

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split tag '" + s + "'");
}

LabeledSet LabeledSet::subset(Split tag) const {
  LabeledSet out;
  out.inputs = Matrix(0, inputs.cols);
  out.targets = Matrix(0, targets.cols);
  for (int i = 0; i < size(); ++i) {
    if (tags[i] != tag) continue;
    out.inputs.data.insert(out.inputs.data.end(), input(i).begin(), input(i).end());
    out.targets.data.insert(out.targets.data.end(), target(i).begin(), target(i).end());
    out.tags.push_back(tag);
    ++out.inputs.rows;
    ++out.targets.rows;
  }
  return out;
}

void LabeledSet::append(const LabeledSet& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  if (other.input_dim() != input_dim() || other.target_dim() != target_dim()) {
    throw ContractError("LabeledSet::append: dimension mismatch");
  }
  inputs.data.insert(inputs.data.end(), other.inputs.data.begin(), other.inputs.data.end());
  targets.data.insert(targets.data.end(), other.targets.data.begin(), other.targets.data.end());
  tags.insert(tags.end(), other.tags.begin(), other.tags.end());
  inputs.rows += other.inputs.rows;
  targets.rows += other.targets.rows;
}

LabeledSet generate_fig2(int n, const GroundTruthDensity& dens, Rng rng) {
  if (n < 1) throw ContractError("generate_fig2: n must be >= 1");
  LabeledSet set;
  set.inputs = Matrix(n, 1);
  set.targets = Matrix(n, 1);
  set.tags.assign(n, Split::kTrain);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-3.0, 3.0);
    set.inputs.at(i, 0) = x;
    set.targets.at(i, 0) = dens.sample(x, rng);
  }
  return set;
}

LabeledSet generate_hetero_sine(int n, double noise_std, Rng rng) {
  if (n < 1) throw ContractError("generate_hetero_sine: n must be >= 1");
  LabeledSet set;
  set.inputs = Matrix(n, 1);
  set.targets = Matrix(n, 1);
  set.tags.assign(n, Split::kTrain);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-3.0, 3.0);
    set.inputs.at(i, 0) = x;
    set.targets.at(i, 0) = std::sin(x) + (1.0 + std::fabs(x)) * noise_std * rng.normal();
  }
  return set;
}

std::array<LabeledSet, 3> split(const LabeledSet& set, std::array<double, 3> fractions,
                                Rng rng) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split fractions must be non-negative");
    total += f;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1 (got " + std::to_string(total) + ")");
  }
  const int n = set.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(i + 1)]);
  }
  const int n_train = static_cast<int>(fractions[0] * n);
  const int n_val = static_cast<int>(fractions[1] * n);

  std::array<LabeledSet, 3> out;
  const Split split_tags[3] = {Split::kTrain, Split::kVal, Split::kTest};
  for (int part = 0; part < 3; ++part) {
    out[part].inputs = Matrix(0, set.input_dim());
    out[part].targets = Matrix(0, set.target_dim());
  }
  for (int pos = 0; pos < n; ++pos) {
    const int part = pos < n_train ? 0 : (pos < n_train + n_val ? 1 : 2);
    LabeledSet& dst = out[part];
    const int i = order[pos];
    dst.inputs.data.insert(dst.inputs.data.end(), set.input(i).begin(), set.input(i).end());
    dst.targets.data.insert(dst.targets.data.end(), set.target(i).begin(), set.target(i).end());
    dst.tags.push_back(split_tags[part]);
    ++dst.inputs.rows;
    ++dst.targets.rows;
  }
  return out;
}

void write_dataset_csv(const std::string& path, const LabeledSet& set) {
  csv::Table table;
  for (int d = 0; d < set.input_dim(); ++d) table.header.push_back("x_" + std::to_string(d));
  for (int d = 0; d < set.target_dim(); ++d) table.header.push_back("y_" + std::to_string(d));
  table.header.push_back("split");
  for (int i = 0; i < set.size(); ++i) {
    std::vector<std::string> row;
    for (double v : set.input(i)) row.push_back(csv::format_double(v));
    for (double v : set.target(i)) row.push_back(csv::format_double(v));
    row.push_back(to_string(set.tags[i]));
    table.rows.push_back(std::move(row));
  }
  csv::write_table(path, table);
}

LabeledSet read_dataset_csv(const std::string& path) {
  const csv::Table table = csv::read_table(path);
  int dx = 0;
  int dy = 0;
  while (table.column("x_" + std::to_string(dx)) >= 0) ++dx;
  while (table.column("y_" + std::to_string(dy)) >= 0) ++dy;
  if (dx == 0 || dy == 0) {
    throw ConfigError("dataset CSV '" + path + "' needs x_0.. and y_0.. columns");
  }
  const int split_col = table.column("split");
  LabeledSet set;
  set.inputs = Matrix(static_cast<int>(table.rows.size()), dx);
  set.targets = Matrix(static_cast<int>(table.rows.size()), dy);
  set.tags.assign(table.rows.size(), Split::kTrain);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = "'" + path + "' row " + std::to_string(i + 1);
    for (int d = 0; d < dx; ++d) {
      set.inputs.at(static_cast<int>(i), d) =
          csv::parse_double(row[table.column("x_" + std::to_string(d))], where);
    }
    for (int d = 0; d < dy; ++d) {
      set.targets.at(static_cast<int>(i), d) =
          csv::parse_double(row[table.column("y_" + std::to_string(d))], where);
    }
    if (split_col >= 0) set.tags[i] = split_from_string(row[split_col]);
  }
  return set;
}

}  // namespace ebreg
