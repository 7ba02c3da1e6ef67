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

#ifndef EBREG_METRICS_HPP
#define EBREG_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "ebreg/models.hpp"
#include "ebreg/synthdata.hpp"

namespace ebreg {

// Conditional log-density at every lattice cell center for the input x.
// The energy model is normalized on the lattice; baselines use their
// closed forms.
std::vector<double> log_density_on_lattice(const AnyModel& model, std::span<const double> x,
                                           const Lattice& lattice);

// Mean of -log p(y_i | x_i) over the test set. The energy model runs
// partition_grid per example; baselines evaluate exactly. Raises EvalError
// when a test target falls outside the lattice.
double test_nll(const AnyModel& model, const LabeledSet& test, const Lattice& lattice);

// The achievable floor: the ground-truth density's own test NLL, with the
// density renormalized on the same lattice for comparability.
double ground_truth_nll(const GroundTruthDensity& truth, const LabeledSet& test,
                        const Lattice& lattice);

// Mean over xs of KL(p_true || p_model), both grid-renormalized. The
// reference is the truth, so missing a mode is penalized.
double grid_kl(const AnyModel& model, std::span<const double> xs,
               const GroundTruthDensity& truth, const Lattice& lattice);

// Component-mean absolute error.
double mae(const Matrix& predictions, const Matrix& targets);

// Row per x, column per lattice cell, grid-normalized density values
// (each row sums to 1/h).
Matrix density_surface(const AnyModel& model, std::span<const double> xs,
                       const Lattice& lattice);

Matrix ground_truth_surface(const GroundTruthDensity& truth, std::span<const double> xs,
                            const Lattice& lattice);

// CSV with a metadata header line (seed, config hash) and fixed columns:
// x, then one density column per lattice cell center.
void write_density_surface_csv(const std::string& path, std::span<const double> xs,
                               const Lattice& lattice, const Matrix& surface,
                               std::uint64_t seed, std::uint64_t config_hash);

}  // namespace ebreg

#endif  // EBREG_METRICS_HPP
