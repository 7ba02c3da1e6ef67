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

#ifndef EBREG_EBM_HPP
#define EBREG_EBM_HPP

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebreg/autodiff.hpp"
#include "ebreg/common.hpp"
#include "ebreg/densities.hpp"
#include "ebreg/rng.hpp"

namespace ebreg {

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  int cells = 1;

  double step() const { return (hi - lo) / cells; }
  double center(int i) const { return lo + (i + 0.5) * step(); }
};

// Uniform midpoint lattice over the target space (1D in the benchmark,
// higher-rank supported for the partition estimate).
struct Lattice {
  std::vector<GridAxis> axes;

  static Lattice uniform_1d(double lo, double hi, int cells);

  int dim() const { return static_cast<int>(axes.size()); }
  long total_cells() const;
  double cell_volume() const;
  void center(long flat, std::span<double> out) const;
  // All cell centers as rows, [total_cells x dim].
  Matrix centers() const;
  void validate() const;
};

// Copyable atomic counter used for eval instrumentation.
struct EvalCounter {
  mutable std::atomic<std::uint64_t> count{0};

  EvalCounter() = default;
  EvalCounter(const EvalCounter& o) : count(o.count.load()) {}
  EvalCounter& operator=(const EvalCounter& o) {
    count.store(o.count.load());
    return *this;
  }
  std::uint64_t value() const { return count.load(); }
};

// Late-fusion scalar energy f(x, y): feature branches for x and y feed a
// joint head. The x feature is computed once per input and shared across
// every y candidate paired with it.
struct EnergyModel {
  ad::Mlp x_branch;
  ad::Mlp y_branch;
  ad::Mlp head;
  EvalCounter x_branch_evals;

  static EnergyModel make(std::span<const int> x_dims, std::span<const int> y_dims,
                          std::span<const int> head_dims, ad::Activation activation,
                          Rng& rng);
  void validate() const;

  int input_dim() const { return x_branch.input_dim(); }
  int target_dim() const { return y_branch.input_dim(); }

  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;

  struct Bound {
    ad::BoundMlp x_branch;
    ad::BoundMlp y_branch;
    ad::BoundMlp head;
  };
  Bound bind(ad::ValueGraph& g) const;

  // f for every row of y_rows against the single row x_row; [R x 1].
  ad::NodeId energy_rows(ad::ValueGraph& g, const Bound& bound, ad::NodeId x_row,
                         ad::NodeId y_rows) const;

  // Graph-recorded scalar energy, differentiable in parameters and y.
  ad::NodeId energy(ad::ValueGraph& g, const Bound& bound, std::span<const double> x,
                    std::span<const double> y) const;
  double energy_value(std::span<const double> x, std::span<const double> y) const;

  // Tape-free batched evaluation for prediction and metrics.
  Matrix x_feature(std::span<const double> x) const;
  std::vector<double> energies_given_feature(const Matrix& x_feat, const Matrix& ys) const;
  std::vector<double> energies(std::span<const double> x, const Matrix& ys) const;

  void collect_gradients(const ad::ValueGraph& g, const Bound& bound,
                         std::span<Matrix> grad_accum, double scale) const;
  std::vector<Matrix> zero_gradients() const;
};

struct PartitionEstimate {
  enum class Method { kGrid, kImportance };

  double value = 0.0;      // estimate of Z(x)
  double log_value = 0.0;  // stable log of the same
  Method method = Method::kGrid;
  long grid_cells = 0;
  int sample_count = 0;
  double effective_sample_size = 0.0;
};

// One importance-sampled NLL term recorded onto a graph.
struct NllTerm {
  ad::NodeId value;                 // scalar loss node
  ad::NodeId energy_at_target;      // f(x_i, y_i)
  double effective_sample_size = 0.0;
};

// log[(1/M) sum_k exp(f(x_i, y_k) - q_logs[k])] - f(x_i, y_i), stabilized.
// q_logs[k] must be the proposal log-density of samples row k given y_i.
NllTerm nll_term(ad::ValueGraph& g, const EnergyModel& model,
                 const EnergyModel::Bound& bound, std::span<const double> x,
                 std::span<const double> y, const Matrix& samples,
                 std::span<const double> q_logs);

// Convenience evaluation on a scratch graph.
double nll_term_value(const EnergyModel& model, std::span<const double> x,
                      std::span<const double> y, const Matrix& samples,
                      std::span<const double> q_logs);

struct BatchLoss {
  double loss = 0.0;
  // Parameter order matches EnergyModel::parameters().
  std::vector<Matrix> gradients;
};

// Mini-batch loss with fresh proposal samples per example (substream
// rng.child(i) for row i, so results do not depend on worker count).
// Raises TrainingError on a non-finite per-example term or when the
// importance weights degenerate (ESS < 1.5).
BatchLoss batch_loss(const EnergyModel& model, const Matrix& xs, const Matrix& ys,
                     const Proposal& proposal, int m, const Rng& rng, int workers = 1);

PartitionEstimate partition_grid(const EnergyModel& model, std::span<const double> x,
                                 const Lattice& lattice);

PartitionEstimate partition_importance(const EnergyModel& model, std::span<const double> x,
                                       std::span<const double> center,
                                       const Proposal& proposal, int m, Rng& rng);

// log p(y | x) = f(x, y) - log Z.
double log_density(const EnergyModel& model, std::span<const double> x,
                   std::span<const double> y, const PartitionEstimate& z);

}  // namespace ebreg

#endif  // EBREG_EBM_HPP
