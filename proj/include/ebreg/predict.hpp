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

#ifndef EBREG_PREDICT_HPP
#define EBREG_PREDICT_HPP

#include <span>
#include <string>
#include <vector>

#include "ebreg/ebm.hpp"

namespace ebreg {

enum class RefineVariant { kS1, kS2 };

RefineVariant refine_variant_from_string(const std::string& s);
std::string to_string(RefineVariant v);

// Gradient-ascent refinement settings. S1 proposes y + step * grad and
// keeps it only if f improves, decaying the step on rejection. S2 updates
// unconditionally and stops early when the change in f is small
// (|delta| < early_stop) or clearly negative (delta < degeneration).
struct RefineConfig {
  RefineVariant variant = RefineVariant::kS1;
  int iterations = 10;
  std::vector<double> step{0.05};  // scalar or one entry per target dim
  double decay = 0.5;
  double early_stop = 0.001;    // Omega_1 >= 0
  double degeneration = -0.01;  // Omega_2 <= 0

  void validate(int target_dim) const;
  std::vector<double> step_for_dim(int target_dim) const;
};

struct RefineStep {
  int iteration = 0;
  std::vector<double> y;
  double f = 0.0;
  bool accepted = false;
  std::vector<double> step;  // step length in effect after this iteration
};

struct RefineResult {
  std::vector<double> y;
  double f = 0.0;
  std::vector<RefineStep> trace;
  bool aborted_non_finite = false;
  std::string diagnostic;
};

RefineResult refine_s1(const EnergyModel& model, std::span<const double> x,
                       std::span<const double> y0, const RefineConfig& cfg);

RefineResult refine_s2(const EnergyModel& model, std::span<const double> x,
                       std::span<const double> y0, const RefineConfig& cfg);

RefineResult refine(const EnergyModel& model, std::span<const double> x,
                    std::span<const double> y0, const RefineConfig& cfg);

// Refines every init (batch-evaluated, the x feature computed once) and
// returns the candidate with maximal f; ties break on the lowest init index.
std::vector<double> refine_multi(const EnergyModel& model, std::span<const double> x,
                                 const Matrix& inits, const RefineConfig& cfg);

// K inits spread uniformly over the lattice range.
Matrix uniform_inits(const Lattice& lattice, int k);

// Trace CSV rows: iteration, y components, f, accepted, step lengths.
void write_trace_csv(const std::string& path, const std::vector<RefineStep>& trace);

}  // namespace ebreg

#endif  // EBREG_PREDICT_HPP
