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

#ifndef EBREG_COMMON_HPP
#define EBREG_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ebreg {

// Invalid configuration, file format, or CLI input. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition of an operation was violated by the caller.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during training (NaN loss, degenerate importance
// weights). Maps to exit code 3.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical or setup failure during evaluation (e.g. grid too narrow).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major f64 matrix. Vectors are 1xN or Nx1 matrices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  static Matrix row(std::span<const double> v) {
    Matrix m(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
  }
  static Matrix column(std::span<const double> v) {
    Matrix m(static_cast<int>(v.size()), 1);
    std::copy(v.begin(), v.end(), m.data.begin());
    return m;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::span<const double> row_span(int r) const {
    return {row_ptr(r), static_cast<std::size_t>(cols)};
  }
  std::size_t size() const { return data.size(); }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ebreg

#endif  // EBREG_COMMON_HPP
