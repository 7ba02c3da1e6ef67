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

#include "ebreg/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "ebreg/csv.hpp"

namespace ebreg {

RefineVariant refine_variant_from_string(const std::string& s) {
  if (s == "s1") return RefineVariant::kS1;
  if (s == "s2") return RefineVariant::kS2;
  throw ConfigError("unknown refine variant '" + s + "' (expected s1|s2)");
}

std::string to_string(RefineVariant v) {
  return v == RefineVariant::kS1 ? "s1" : "s2";
}

void RefineConfig::validate(int target_dim) const {
  if (iterations < 0) throw ConfigError("refine iterations must be >= 0");
  if (step.size() != 1 && static_cast<int>(step.size()) != target_dim) {
    throw ConfigError("refine step must be scalar or one entry per target dim");
  }
  for (double s : step) {
    if (!(s > 0.0)) throw ConfigError("refine step lengths must be positive");
  }
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("refine decay must be in (0, 1]");
  if (early_stop < 0.0) throw ConfigError("refine early_stop must be >= 0");
  if (degeneration > 0.0) throw ConfigError("refine degeneration must be <= 0");
}

std::vector<double> RefineConfig::step_for_dim(int target_dim) const {
  if (static_cast<int>(step.size()) == target_dim) return step;
  return std::vector<double>(target_dim, step[0]);
}

namespace {

struct CandidateState {
  std::vector<double> y;
  std::vector<double> step;
  double f = 0.0;
  bool running = true;
  // Best finite iterate, the fallback when the energy goes non-finite.
  std::vector<double> best_y;
  double best_f = 0.0;
  bool has_best = false;
};

bool finite_row(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::vector<RefineResult> run_refine(const EnergyModel& model, std::span<const double> x,
                                     const Matrix& inits, const RefineConfig& cfg,
                                     bool want_trace) {
  const int k = inits.rows;
  const int dy = inits.cols;
  if (k < 1) throw ContractError("refine: needs at least one init");
  if (dy != model.target_dim()) throw ContractError("refine: init dimension mismatch");
  cfg.validate(dy);
  const std::vector<double> step0 = cfg.step_for_dim(dy);

  // The x feature is extracted once; each iteration only re-runs the
  // y branch and head.
  const Matrix x_feat = model.x_feature(x);

  std::vector<RefineResult> results(k);
  std::vector<CandidateState> states(k);
  {
    const std::vector<double> f0 = model.energies_given_feature(x_feat, inits);
    for (int i = 0; i < k; ++i) {
      CandidateState& st = states[i];
      st.y.assign(inits.row_ptr(i), inits.row_ptr(i) + dy);
      st.step = step0;
      st.f = f0[i];
      if (std::isfinite(f0[i])) {
        st.best_y = st.y;
        st.best_f = f0[i];
        st.has_best = true;
      } else {
        st.running = false;
        results[i].aborted_non_finite = true;
        results[i].diagnostic = "non-finite energy at initialization";
      }
    }
  }

  for (int t = 1; t <= cfg.iterations; ++t) {
    std::vector<int> active;
    for (int i = 0; i < k; ++i) {
      if (states[i].running) active.push_back(i);
    }
    if (active.empty()) break;

    Matrix ys(static_cast<int>(active.size()), dy);
    for (std::size_t a = 0; a < active.size(); ++a) {
      std::memcpy(ys.row_ptr(static_cast<int>(a)), states[active[a]].y.data(),
                  sizeof(double) * dy);
    }

    // One graph per iteration: gradient of the summed energies gives each
    // candidate's own gradient because rows are independent.
    ad::ValueGraph g;
    const ad::BoundMlp by = ad::bind(g, model.y_branch);
    const ad::BoundMlp bh = ad::bind(g, model.head);
    const ad::NodeId y_node = g.input(ys);
    const ad::NodeId gx_node = g.input(x_feat);
    const ad::NodeId gy = ad::forward(g, model.y_branch, by, y_node);
    const ad::NodeId joint = g.augment_rows(gy, gx_node);
    const ad::NodeId f_node = ad::forward(g, model.head, bh, joint);
    g.backward(g.sum(f_node));
    const std::span<const double> prev_f = g.value(f_node);
    const std::span<const double> grad = g.gradient(y_node);

    Matrix proposals(static_cast<int>(active.size()), dy);
    for (std::size_t a = 0; a < active.size(); ++a) {
      CandidateState& st = states[active[a]];
      const std::span<const double> grow{grad.data() + a * dy, static_cast<std::size_t>(dy)};
      if (!std::isfinite(prev_f[a]) || !finite_row(grow)) {
        st.running = false;
        results[active[a]].aborted_non_finite = true;
        results[active[a]].diagnostic =
            "non-finite energy or gradient at iteration " + std::to_string(t);
        continue;
      }
      for (int d = 0; d < dy; ++d) {
        proposals.at(static_cast<int>(a), d) = st.y[d] + st.step[d] * grow[d];
      }
    }

    const std::vector<double> new_f = model.energies_given_feature(x_feat, proposals);

    for (std::size_t a = 0; a < active.size(); ++a) {
      const int i = active[a];
      CandidateState& st = states[i];
      if (!st.running) continue;
      const double prev = prev_f[a];
      const double fresh = new_f[a];

      if (cfg.variant == RefineVariant::kS1) {
        bool accepted = false;
        if (std::isfinite(fresh) && fresh > prev) {
          st.y.assign(proposals.row_ptr(static_cast<int>(a)),
                      proposals.row_ptr(static_cast<int>(a)) + dy);
          st.f = fresh;
          accepted = true;
          if (!st.has_best || fresh > st.best_f) {
            st.best_y = st.y;
            st.best_f = fresh;
            st.has_best = true;
          }
        } else if (!std::isfinite(fresh)) {
          // Treat as a rejection: the candidate stays at its last good y.
          for (double& s : st.step) s *= cfg.decay;
        } else {
          for (double& s : st.step) s *= cfg.decay;
        }
        if (want_trace) {
          results[i].trace.push_back({t, st.y, st.f, accepted, st.step});
        }
      } else {
        st.y.assign(proposals.row_ptr(static_cast<int>(a)),
                    proposals.row_ptr(static_cast<int>(a)) + dy);
        st.f = fresh;
        if (want_trace) {
          results[i].trace.push_back({t, st.y, st.f, true, st.step});
        }
        if (!std::isfinite(fresh)) {
          st.running = false;
          results[i].aborted_non_finite = true;
          results[i].diagnostic = "non-finite energy at iteration " + std::to_string(t);
          continue;
        }
        if (fresh > st.best_f || !st.has_best) {
          st.best_y = st.y;
          st.best_f = fresh;
          st.has_best = true;
        }
        const double delta = fresh - prev;
        if (std::fabs(delta) < cfg.early_stop || delta < cfg.degeneration) {
          st.running = false;  // returns the updated y, as specified
        }
      }
    }
  }

  for (int i = 0; i < k; ++i) {
    CandidateState& st = states[i];
    RefineResult& res = results[i];
    if (res.aborted_non_finite && st.has_best) {
      res.y = st.best_y;
      res.f = st.best_f;
    } else if (res.aborted_non_finite && !st.has_best) {
      res.y.assign(inits.row_ptr(i), inits.row_ptr(i) + dy);
      res.f = st.f;
    } else {
      res.y = st.y;
      res.f = st.f;
    }
  }
  return results;
}

}  // namespace

RefineResult refine_s1(const EnergyModel& model, std::span<const double> x,
                       std::span<const double> y0, const RefineConfig& cfg) {
  if (cfg.variant != RefineVariant::kS1) throw ContractError("refine_s1: cfg.variant must be S1");
  return run_refine(model, x, Matrix::row(y0), cfg, true)[0];
}

RefineResult refine_s2(const EnergyModel& model, std::span<const double> x,
                       std::span<const double> y0, const RefineConfig& cfg) {
  if (cfg.variant != RefineVariant::kS2) throw ContractError("refine_s2: cfg.variant must be S2");
  return run_refine(model, x, Matrix::row(y0), cfg, true)[0];
}

RefineResult refine(const EnergyModel& model, std::span<const double> x,
                    std::span<const double> y0, const RefineConfig& cfg) {
  return run_refine(model, x, Matrix::row(y0), cfg, true)[0];
}

std::vector<double> refine_multi(const EnergyModel& model, std::span<const double> x,
                                 const Matrix& inits, const RefineConfig& cfg) {
  const std::vector<RefineResult> all = run_refine(model, x, inits, cfg, false);
  int best = 0;
  for (int i = 1; i < static_cast<int>(all.size()); ++i) {
    if (all[i].f > all[best].f) best = i;
  }
  return all[best].y;
}

Matrix uniform_inits(const Lattice& lattice, int k) {
  if (k < 1) throw ContractError("uniform_inits: k must be >= 1");
  if (lattice.dim() != 1) throw ContractError("uniform_inits: only 1D lattices supported");
  Matrix inits(k, 1);
  const double lo = lattice.axes[0].lo;
  const double width = lattice.axes[0].hi - lo;
  for (int i = 0; i < k; ++i) inits.at(i, 0) = lo + (i + 0.5) * width / k;
  return inits;
}

void write_trace_csv(const std::string& path, const std::vector<RefineStep>& trace) {
  csv::Table table;
  const int dy = trace.empty() ? 1 : static_cast<int>(trace.front().y.size());
  table.header.push_back("iteration");
  for (int d = 0; d < dy; ++d) table.header.push_back("y_" + std::to_string(d));
  table.header.push_back("f");
  table.header.push_back("accepted");
  for (int d = 0; d < dy; ++d) table.header.push_back("step_" + std::to_string(d));
  for (const RefineStep& s : trace) {
    std::vector<std::string> row;
    row.push_back(std::to_string(s.iteration));
    for (double v : s.y) row.push_back(csv::format_double(v));
    row.push_back(csv::format_double(s.f));
    row.push_back(s.accepted ? "1" : "0");
    for (double v : s.step) row.push_back(csv::format_double(v));
    table.rows.push_back(std::move(row));
  }
  csv::write_table(path, table);
}

}  // namespace ebreg
