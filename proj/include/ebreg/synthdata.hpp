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

#ifndef EBREG_SYNTHDATA_HPP
#define EBREG_SYNTHDATA_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ebreg/common.hpp"
#include "ebreg/densities.hpp"
#include "ebreg/rng.hpp"

namespace ebreg {

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// I.i.d. input-target pairs with per-example split tags.
struct LabeledSet {
  Matrix inputs;   // [N x Dx]
  Matrix targets;  // [N x Dy]
  std::vector<Split> tags;

  int size() const { return inputs.rows; }
  int input_dim() const { return inputs.cols; }
  int target_dim() const { return targets.cols; }

  std::span<const double> input(int i) const {
    return {inputs.data.data() + static_cast<std::size_t>(i) * inputs.cols,
            static_cast<std::size_t>(inputs.cols)};
  }
  std::span<const double> target(int i) const {
    return {targets.data.data() + static_cast<std::size_t>(i) * targets.cols,
            static_cast<std::size_t>(targets.cols)};
  }

  LabeledSet subset(Split tag) const;
  void append(const LabeledSet& other);
};

// x ~ U(-3, 3), y drawn from the ground-truth conditional density.
// All rows are tagged train; use split() or append() to build splits.
LabeledSet generate_fig2(int n, const GroundTruthDensity& dens, Rng rng);

// Smoke-test task: y = sin(x) + (1 + |x|) * eps, eps ~ N(0, noise_std^2),
// x ~ U(-3, 3). Not part of the benchmark family.
LabeledSet generate_hetero_sine(int n, double noise_std, Rng rng);

// Seed-deterministic disjoint exhaustive partition; fractions must sum to 1.
std::array<LabeledSet, 3> split(const LabeledSet& set, std::array<double, 3> fractions,
                                Rng rng);

// CSV with header x_0..x_{Dx-1}, y_0..y_{Dy-1}, split.
void write_dataset_csv(const std::string& path, const LabeledSet& set);
LabeledSet read_dataset_csv(const std::string& path);

}  // namespace ebreg

#endif  // EBREG_SYNTHDATA_HPP
