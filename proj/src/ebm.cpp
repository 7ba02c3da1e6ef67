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

#include "ebreg/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

namespace ebreg {

Lattice Lattice::uniform_1d(double lo, double hi, int cells) {
  Lattice lat;
  lat.axes.push_back({lo, hi, cells});
  lat.validate();
  return lat;
}

long Lattice::total_cells() const {
  long total = 1;
  for (const GridAxis& a : axes) total *= a.cells;
  return total;
}

double Lattice::cell_volume() const {
  double v = 1.0;
  for (const GridAxis& a : axes) v *= a.step();
  return v;
}

void Lattice::center(long flat, std::span<double> out) const {
  for (int d = dim() - 1; d >= 0; --d) {
    const int c = axes[d].cells;
    out[d] = axes[d].center(static_cast<int>(flat % c));
    flat /= c;
  }
}

Matrix Lattice::centers() const {
  const long n = total_cells();
  Matrix m(static_cast<int>(n), dim());
  std::vector<double> buf(dim());
  for (long i = 0; i < n; ++i) {
    center(i, buf);
    for (int d = 0; d < dim(); ++d) m.at(static_cast<int>(i), d) = buf[d];
  }
  return m;
}

void Lattice::validate() const {
  if (axes.empty()) throw ContractError("lattice needs at least one axis");
  for (const GridAxis& a : axes) {
    if (a.cells < 1) throw ContractError("lattice axis needs at least one cell");
    if (!(a.hi > a.lo)) throw ContractError("lattice axis range must be non-empty");
  }
}

EnergyModel EnergyModel::make(std::span<const int> x_dims, std::span<const int> y_dims,
                              std::span<const int> head_dims, ad::Activation activation,
                              Rng& rng) {
  EnergyModel model;
  Rng rx = rng.child("x_branch");
  Rng ry = rng.child("y_branch");
  Rng rh = rng.child("head");
  // Branch outputs are features, so the activation applies to every
  // branch layer; only the head's final layer is linear.
  model.x_branch = ad::Mlp::make(x_dims, activation, activation, rx);
  model.y_branch = ad::Mlp::make(y_dims, activation, activation, ry);
  model.head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rh);
  model.validate();
  return model;
}

void EnergyModel::validate() const {
  if (head.output_dim() != 1) throw ConfigError("energy head must output a scalar");
  if (head.input_dim() != x_branch.output_dim() + y_branch.output_dim()) {
    throw ConfigError("energy head fan-in must equal x-branch + y-branch feature dims");
  }
}

std::vector<Matrix*> EnergyModel::parameters() {
  std::vector<Matrix*> out;
  for (ad::Mlp* mlp : {&x_branch, &y_branch, &head}) {
    for (ad::DenseLayer& layer : mlp->layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<const Matrix*> EnergyModel::parameters() const {
  std::vector<const Matrix*> out;
  for (const ad::Mlp* mlp : {&x_branch, &y_branch, &head}) {
    for (const ad::DenseLayer& layer : mlp->layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

std::vector<std::string> EnergyModel::parameter_names() const {
  std::vector<std::string> out;
  const char* branch_names[3] = {"x_branch", "y_branch", "head"};
  const ad::Mlp* mlps[3] = {&x_branch, &y_branch, &head};
  for (int b = 0; b < 3; ++b) {
    for (std::size_t i = 0; i < mlps[b]->layers.size(); ++i) {
      out.push_back(std::string(branch_names[b]) + "." + std::to_string(i) + ".weight");
      out.push_back(std::string(branch_names[b]) + "." + std::to_string(i) + ".bias");
    }
  }
  return out;
}

EnergyModel::Bound EnergyModel::bind(ad::ValueGraph& g) const {
  return {ad::bind(g, x_branch), ad::bind(g, y_branch), ad::bind(g, head)};
}

ad::NodeId EnergyModel::energy_rows(ad::ValueGraph& g, const Bound& bound, ad::NodeId x_row,
                                    ad::NodeId y_rows) const {
  if (g.rows(x_row) != 1) throw ContractError("energy_rows: x must be a single row");
  const ad::NodeId gx = ad::forward(g, x_branch, bound.x_branch, x_row);
  x_branch_evals.count.fetch_add(1, std::memory_order_relaxed);
  const ad::NodeId gy = ad::forward(g, y_branch, bound.y_branch, y_rows);
  const ad::NodeId joint = g.augment_rows(gy, gx);
  return ad::forward(g, head, bound.head, joint);
}

ad::NodeId EnergyModel::energy(ad::ValueGraph& g, const Bound& bound, std::span<const double> x,
                               std::span<const double> y) const {
  const ad::NodeId x_row = g.input(Matrix::row(x));
  const ad::NodeId y_row = g.input(Matrix::row(y));
  return energy_rows(g, bound, x_row, y_row);
}

double EnergyModel::energy_value(std::span<const double> x, std::span<const double> y) const {
  Matrix ys = Matrix::row(y);
  return energies(x, ys)[0];
}

Matrix EnergyModel::x_feature(std::span<const double> x) const {
  x_branch_evals.count.fetch_add(1, std::memory_order_relaxed);
  return x_branch.eval(Matrix::row(x));
}

std::vector<double> EnergyModel::energies_given_feature(const Matrix& x_feat,
                                                        const Matrix& ys) const {
  const Matrix gy = y_branch.eval(ys);
  Matrix joint(gy.rows, gy.cols + x_feat.cols);
  for (int r = 0; r < gy.rows; ++r) {
    std::memcpy(joint.row_ptr(r), gy.row_ptr(r), sizeof(double) * gy.cols);
    std::memcpy(joint.row_ptr(r) + gy.cols, x_feat.data.data(), sizeof(double) * x_feat.cols);
  }
  const Matrix f = head.eval(joint);
  return f.data;
}

std::vector<double> EnergyModel::energies(std::span<const double> x, const Matrix& ys) const {
  return energies_given_feature(x_feature(x), ys);
}

void EnergyModel::collect_gradients(const ad::ValueGraph& g, const Bound& bound,
                                    std::span<Matrix> grad_accum, double scale) const {
  const std::size_t nx = x_branch.layers.size() * 2;
  const std::size_t ny = y_branch.layers.size() * 2;
  const std::size_t nh = head.layers.size() * 2;
  if (grad_accum.size() != nx + ny + nh) {
    throw ContractError("collect_gradients: accumulator count mismatch");
  }
  ad::accumulate_gradients(g, bound.x_branch, grad_accum.subspan(0, nx), scale);
  ad::accumulate_gradients(g, bound.y_branch, grad_accum.subspan(nx, ny), scale);
  ad::accumulate_gradients(g, bound.head, grad_accum.subspan(nx + ny, nh), scale);
}

std::vector<Matrix> EnergyModel::zero_gradients() const {
  std::vector<Matrix> out;
  for (const Matrix* p : parameters()) out.emplace_back(p->rows, p->cols);
  return out;
}

namespace {

double ess_from_log_weights(std::span<const double> w) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : w) m = std::max(m, v);
  if (!std::isfinite(m)) return 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : w) {
    const double e = std::exp(v - m);
    s1 += e;
    s2 += e * e;
  }
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

}  // namespace

NllTerm nll_term(ad::ValueGraph& g, const EnergyModel& model, const EnergyModel::Bound& bound,
                 std::span<const double> x, std::span<const double> y, const Matrix& samples,
                 std::span<const double> q_logs) {
  const int m = samples.rows;
  if (m < 1) throw ContractError("nll_term: needs at least one sample (M >= 1)");
  if (static_cast<int>(q_logs.size()) != m) {
    throw ContractError("nll_term: q_logs length must equal sample count");
  }
  if (samples.cols != static_cast<int>(y.size())) {
    throw ContractError("nll_term: sample dimension mismatch");
  }

  Matrix stacked(m + 1, samples.cols);
  std::memcpy(stacked.row_ptr(0), y.data(), sizeof(double) * y.size());
  std::memcpy(stacked.row_ptr(1), samples.data.data(), sizeof(double) * samples.size());

  const ad::NodeId x_row = g.input(Matrix::row(x));
  const ad::NodeId y_rows = g.input(stacked);
  const ad::NodeId f = model.energy_rows(g, bound, x_row, y_rows);
  const ad::NodeId f_gt = g.slice_rows(f, 0, 1);
  const ad::NodeId f_samples = g.slice_rows(f, 1, m);
  const ad::NodeId q = g.input(Matrix::column(q_logs));
  const ad::NodeId log_weights = g.sub(f_samples, q);
  const ad::NodeId lse = g.logsumexp(log_weights);
  const ad::NodeId term =
      g.sub(g.add_const(lse, -std::log(static_cast<double>(m))), f_gt);

  NllTerm out;
  out.value = term;
  out.energy_at_target = f_gt;
  out.effective_sample_size = ess_from_log_weights(g.value(log_weights));
  return out;
}

double nll_term_value(const EnergyModel& model, std::span<const double> x,
                      std::span<const double> y, const Matrix& samples,
                      std::span<const double> q_logs) {
  ad::ValueGraph g;
  const EnergyModel::Bound bound = model.bind(g);
  const NllTerm t = nll_term(g, model, bound, x, y, samples, q_logs);
  return g.scalar_value(t.value);
}

BatchLoss batch_loss(const EnergyModel& model, const Matrix& xs, const Matrix& ys,
                     const Proposal& proposal, int m, const Rng& rng, int workers) {
  const int n = xs.rows;
  if (n < 1) throw ContractError("batch_loss: batch must be non-empty");
  if (ys.rows != n) throw ContractError("batch_loss: inputs/targets row mismatch");
  if (proposal.dim != ys.cols) throw ContractError("batch_loss: proposal dim mismatch");
  proposal.validate();

  std::vector<double> losses(n, 0.0);
  std::vector<double> esses(n, 0.0);
  std::vector<std::vector<Matrix>> grads(n);
  std::vector<std::string> failures(n);

  auto run_example = [&](int i, ad::ValueGraph& g) {
    const std::span<const double> x = xs.row_span(i);
    const std::span<const double> y = ys.row_span(i);
    Rng example_rng = rng.child(static_cast<std::uint64_t>(i));
    const auto sampled = sample_proposal(y, proposal, m, example_rng);
    Matrix samples(m, ys.cols);
    std::vector<double> q_logs(m);
    for (int k = 0; k < m; ++k) {
      for (int d = 0; d < ys.cols; ++d) samples.at(k, d) = sampled[k][d];
      q_logs[k] = proposal_log_density(sampled[k], y, proposal);
    }
    g.clear();
    const EnergyModel::Bound bound = model.bind(g);
    const NllTerm t = nll_term(g, model, bound, x, y, samples, q_logs);
    const double value = g.scalar_value(t.value);
    esses[i] = t.effective_sample_size;
    if (!std::isfinite(value)) {
      failures[i] = "non-finite loss at example " + std::to_string(i);
      return;
    }
    if (t.effective_sample_size < 1.5) {
      failures[i] = "importance weights degenerate at example " + std::to_string(i) +
                    " (ESS=" + std::to_string(t.effective_sample_size) + ")";
      return;
    }
    g.backward(t.value);
    grads[i] = model.zero_gradients();
    model.collect_gradients(g, bound, grads[i], 1.0);
    losses[i] = value;
  };

  if (workers <= 1 || n == 1) {
    ad::ValueGraph g;
    for (int i = 0; i < n; ++i) run_example(i, g);
  } else {
    const int t = std::min(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (int w = 0; w < t; ++w) {
      pool.emplace_back([&, w]() {
        ad::ValueGraph g;
        for (int i = w; i < n; i += t) run_example(i, g);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (int i = 0; i < n; ++i) {
    if (!failures[i].empty()) throw TrainingError("batch_loss: " + failures[i]);
  }

  BatchLoss out;
  out.gradients = model.zero_gradients();
  const double inv_n = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    out.loss += losses[i];
    for (std::size_t p = 0; p < out.gradients.size(); ++p) {
      Matrix& acc = out.gradients[p];
      const Matrix& gi = grads[i][p];
      for (std::size_t k = 0; k < acc.size(); ++k) acc.data[k] += inv_n * gi.data[k];
    }
  }
  out.loss *= inv_n;
  return out;
}

PartitionEstimate partition_grid(const EnergyModel& model, std::span<const double> x,
                                 const Lattice& lattice) {
  lattice.validate();
  if (lattice.dim() != model.target_dim()) {
    throw ContractError("partition_grid: lattice rank must match target dim");
  }
  const std::vector<double> f = model.energies(x, lattice.centers());
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : f) mx = std::max(mx, v);
  double s = 0.0;
  for (double v : f) s += std::exp(v - mx);
  PartitionEstimate z;
  z.method = PartitionEstimate::Method::kGrid;
  z.grid_cells = lattice.total_cells();
  z.log_value = mx + std::log(s) + std::log(lattice.cell_volume());
  z.value = std::exp(z.log_value);
  return z;
}

PartitionEstimate partition_importance(const EnergyModel& model, std::span<const double> x,
                                       std::span<const double> center,
                                       const Proposal& proposal, int m, Rng& rng) {
  if (m < 1) throw ContractError("partition_importance: M must be >= 1");
  proposal.validate();
  const auto sampled = sample_proposal(center, proposal, m, rng);
  Matrix samples(m, proposal.dim);
  std::vector<double> log_w(m);
  for (int k = 0; k < m; ++k) {
    for (int d = 0; d < proposal.dim; ++d) samples.at(k, d) = sampled[k][d];
  }
  const std::vector<double> f = model.energies(x, samples);
  for (int k = 0; k < m; ++k) {
    log_w[k] = f[k] - proposal_log_density(sampled[k], center, proposal);
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_w) mx = std::max(mx, v);
  double s = 0.0;
  for (double v : log_w) s += std::exp(v - mx);
  PartitionEstimate z;
  z.method = PartitionEstimate::Method::kImportance;
  z.sample_count = m;
  z.effective_sample_size = ess_from_log_weights(log_w);
  z.log_value = mx + std::log(s) - std::log(static_cast<double>(m));
  z.value = std::exp(z.log_value);
  return z;
}

double log_density(const EnergyModel& model, std::span<const double> x,
                   std::span<const double> y, const PartitionEstimate& z) {
  if (!(z.value > 0.0)) throw ContractError("log_density: partition estimate must be positive");
  return model.energy_value(x, y) - z.log_value;
}

}  // namespace ebreg
