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

#include "ebreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebreg/csv.hpp"
#include "ebreg/densities.hpp"

namespace ebreg {

namespace {

void check_lattice_1d(const Lattice& lattice, const char* what) {
  lattice.validate();
  if (lattice.dim() != 1) {
    throw ContractError(std::string(what) + ": needs a 1D target lattice");
  }
}

void check_target_in_range(double y, const Lattice& lattice) {
  const GridAxis& ax = lattice.axes[0];
  if (y < ax.lo || y > ax.hi) {
    throw EvalError("test target " + std::to_string(y) +
                    " is outside the evaluation grid [" + std::to_string(ax.lo) + ", " +
                    std::to_string(ax.hi) + "]");
  }
}

// Normalized cell probabilities from per-cell log densities.
std::vector<double> cell_probabilities(std::span<const double> log_dens) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : log_dens) m = std::max(m, v);
  std::vector<double> p(log_dens.size(), 0.0);
  if (!std::isfinite(m)) return p;
  double s = 0.0;
  for (std::size_t i = 0; i < log_dens.size(); ++i) {
    p[i] = std::exp(log_dens[i] - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> truth_log_on_lattice(const GroundTruthDensity& truth, double x,
                                         const Lattice& lattice) {
  std::vector<double> out(lattice.total_cells());
  for (long c = 0; c < lattice.total_cells(); ++c) {
    out[c] = truth.log_density(x, lattice.axes[0].center(static_cast<int>(c)));
  }
  return out;
}

}  // namespace

std::vector<double> log_density_on_lattice(const AnyModel& model, std::span<const double> x,
                                           const Lattice& lattice) {
  check_lattice_1d(lattice, "log_density_on_lattice");
  if (const auto* ebm = std::get_if<EnergyModel>(&model)) {
    std::vector<double> f = ebm->energies(x, lattice.centers());
    const PartitionEstimate z = partition_grid(*ebm, x, lattice);
    for (double& v : f) v -= z.log_value;
    return f;
  }
  std::vector<double> out(lattice.total_cells());
  for (long c = 0; c < lattice.total_cells(); ++c) {
    const double y = lattice.axes[0].center(static_cast<int>(c));
    out[c] = baseline_log_density(model, x, std::span<const double>{&y, 1});
  }
  return out;
}

double test_nll(const AnyModel& model, const LabeledSet& test, const Lattice& lattice) {
  check_lattice_1d(lattice, "test_nll");
  if (test.size() < 1) throw ContractError("test_nll: empty test set");
  if (model_target_dim(model) != 1 || test.target_dim() != 1) {
    throw ContractError("test_nll: only scalar targets are supported");
  }
  for (int i = 0; i < test.size(); ++i) check_target_in_range(test.target(i)[0], lattice);

  double acc = 0.0;
  if (const auto* ebm = std::get_if<EnergyModel>(&model)) {
    for (int i = 0; i < test.size(); ++i) {
      const PartitionEstimate z = partition_grid(*ebm, test.input(i), lattice);
      acc -= log_density(*ebm, test.input(i), test.target(i), z);
    }
  } else {
    for (int i = 0; i < test.size(); ++i) {
      acc -= baseline_log_density(model, test.input(i), test.target(i));
    }
  }
  return acc / test.size();
}

double ground_truth_nll(const GroundTruthDensity& truth, const LabeledSet& test,
                        const Lattice& lattice) {
  check_lattice_1d(lattice, "ground_truth_nll");
  if (test.size() < 1) throw ContractError("ground_truth_nll: empty test set");
  const double h = lattice.cell_volume();
  double acc = 0.0;
  for (int i = 0; i < test.size(); ++i) {
    const double x = test.input(i)[0];
    check_target_in_range(test.target(i)[0], lattice);
    const std::vector<double> lt = truth_log_on_lattice(truth, x, lattice);
    double m = -std::numeric_limits<double>::infinity();
    for (double v : lt) m = std::max(m, v);
    double s = 0.0;
    for (double v : lt) s += std::exp(v - m);
    const double log_mass = m + std::log(s) + std::log(h);
    acc -= truth.log_density(x, test.target(i)[0]) - log_mass;
  }
  return acc / test.size();
}

double grid_kl(const AnyModel& model, std::span<const double> xs,
               const GroundTruthDensity& truth, const Lattice& lattice) {
  check_lattice_1d(lattice, "grid_kl");
  if (xs.empty()) throw ContractError("grid_kl: needs at least one x");
  double acc = 0.0;
  for (double x : xs) {
    const std::vector<double> lt = truth_log_on_lattice(truth, x, lattice);
    const std::vector<double> lq =
        log_density_on_lattice(model, std::span<const double>{&x, 1}, lattice);
    const std::vector<double> p = cell_probabilities(lt);
    const std::vector<double> q = cell_probabilities(lq);
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c] <= 0.0) continue;
      if (q[c] <= 0.0) {
        kl = std::numeric_limits<double>::infinity();
        break;
      }
      kl += p[c] * (std::log(p[c]) - std::log(q[c]));
    }
    acc += kl;
  }
  return acc / xs.size();
}

double mae(const Matrix& predictions, const Matrix& targets) {
  if (predictions.rows != targets.rows || predictions.cols != targets.cols) {
    throw ContractError("mae: shape mismatch");
  }
  if (predictions.rows < 1) throw ContractError("mae: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    acc += std::fabs(predictions.data[i] - targets.data[i]);
  }
  return acc / predictions.size();
}

Matrix density_surface(const AnyModel& model, std::span<const double> xs,
                       const Lattice& lattice) {
  check_lattice_1d(lattice, "density_surface");
  const double h = lattice.cell_volume();
  Matrix surface(static_cast<int>(xs.size()), static_cast<int>(lattice.total_cells()));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    const std::vector<double> lq =
        log_density_on_lattice(model, std::span<const double>{&xs[r], 1}, lattice);
    const std::vector<double> q = cell_probabilities(lq);
    for (std::size_t c = 0; c < q.size(); ++c) {
      surface.at(static_cast<int>(r), static_cast<int>(c)) = q[c] / h;
    }
  }
  return surface;
}

Matrix ground_truth_surface(const GroundTruthDensity& truth, std::span<const double> xs,
                            const Lattice& lattice) {
  check_lattice_1d(lattice, "ground_truth_surface");
  const double h = lattice.cell_volume();
  Matrix surface(static_cast<int>(xs.size()), static_cast<int>(lattice.total_cells()));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    const std::vector<double> lt = truth_log_on_lattice(truth, xs[r], lattice);
    const std::vector<double> p = cell_probabilities(lt);
    for (std::size_t c = 0; c < p.size(); ++c) {
      surface.at(static_cast<int>(r), static_cast<int>(c)) = p[c] / h;
    }
  }
  return surface;
}

void write_density_surface_csv(const std::string& path, std::span<const double> xs,
                               const Lattice& lattice, const Matrix& surface,
                               std::uint64_t seed, std::uint64_t config_hash) {
  csv::Table table;
  table.comments.push_back("# seed=" + std::to_string(seed) +
                           " config_hash=" + std::to_string(config_hash));
  table.header.push_back("x");
  for (long c = 0; c < lattice.total_cells(); ++c) {
    table.header.push_back("y=" + csv::format_double(lattice.axes[0].center(static_cast<int>(c))));
  }
  for (std::size_t r = 0; r < xs.size(); ++r) {
    std::vector<std::string> row;
    row.push_back(csv::format_double(xs[r]));
    for (int c = 0; c < surface.cols; ++c) {
      row.push_back(csv::format_double(surface.at(static_cast<int>(r), c)));
    }
    table.rows.push_back(std::move(row));
  }
  csv::write_table(path, table);
}

}  // namespace ebreg
