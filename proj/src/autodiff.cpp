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

#include "ebreg/autodiff.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace ebreg::ad {

namespace {

// out[r, :] = b + in[r, :] * W^T. wt is scratch for the [in x out]
// transpose; the k-major loop keeps the inner stride-1 update
// vectorizable without reordering any floating point sums.
void affine_apply(const double* in, int rows, int in_dim, const double* w,
                  const double* b, int out_dim, double* out,
                  std::vector<double>& wt) {
  wt.resize(static_cast<std::size_t>(in_dim) * out_dim);
  for (int j = 0; j < out_dim; ++j) {
    for (int k = 0; k < in_dim; ++k) {
      wt[static_cast<std::size_t>(k) * out_dim + j] =
          w[static_cast<std::size_t>(j) * in_dim + k];
    }
  }
  for (int r = 0; r < rows; ++r) {
    double* o = out + static_cast<std::size_t>(r) * out_dim;
    std::memcpy(o, b, sizeof(double) * out_dim);
    const double* x = in + static_cast<std::size_t>(r) * in_dim;
    for (int k = 0; k < in_dim; ++k) {
      const double a = x[k];
      const double* wrow = wt.data() + static_cast<std::size_t>(k) * out_dim;
      for (int j = 0; j < out_dim; ++j) o[j] += a * wrow[j];
    }
  }
}

}  // namespace

NodeId ValueGraph::push(Op op, int rows, int cols, std::vector<NodeId> ins,
                        double payload, int aux) {
  if (rows < 1 || cols < 1) throw ContractError("autodiff: node shape must be positive");
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.offset = values_.size();
  n.payload = payload;
  n.aux = aux;
  n.inputs = std::move(ins);
  values_.resize(values_.size() + static_cast<std::size_t>(rows) * cols);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void ValueGraph::check_same_shape(NodeId a, NodeId b, const char* what) const {
  if (nodes_[a].rows != nodes_[b].rows || nodes_[a].cols != nodes_[b].cols) {
    throw ContractError(std::string("autodiff: shape mismatch in ") + what);
  }
}

NodeId ValueGraph::input(int rows, int cols) { return push(Op::kLeaf, rows, cols, {}); }

NodeId ValueGraph::input(const Matrix& m) {
  NodeId id = push(Op::kLeaf, m.rows, m.cols, {});
  std::memcpy(val(id), m.data.data(), sizeof(double) * m.size());
  return id;
}

NodeId ValueGraph::scalar(double v) {
  NodeId id = push(Op::kLeaf, 1, 1, {});
  *val(id) = v;
  return id;
}

std::span<double> ValueGraph::value_mut(NodeId id) { return {val(id), extent(id)}; }

std::span<const double> ValueGraph::value(NodeId id) const { return {val(id), extent(id)}; }

std::span<const double> ValueGraph::gradient(NodeId id) const {
  return {grads_.data() + nodes_[id].offset, extent(id)};
}

double ValueGraph::scalar_value(NodeId id) const {
  if (extent(id) != 1) throw ContractError("autodiff: scalar_value on non-scalar node");
  return *val(id);
}

NodeId ValueGraph::affine(NodeId x, NodeId w, NodeId b) {
  const int in_dim = nodes_[w].cols;
  const int out_dim = nodes_[w].rows;
  if (nodes_[x].cols != in_dim) throw ContractError("autodiff: affine input width != weight fan-in");
  if (nodes_[b].rows != 1 || nodes_[b].cols != out_dim) {
    throw ContractError("autodiff: affine bias shape must be [1 x out]");
  }
  NodeId id = push(Op::kAffine, nodes_[x].rows, out_dim, {x, w, b});
  affine_apply(val(x), nodes_[x].rows, in_dim, val(w), val(b), out_dim, val(id), scratch_);
  return id;
}

NodeId ValueGraph::relu(NodeId x) {
  NodeId id = push(Op::kRelu, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
  return id;
}

NodeId ValueGraph::tanh(NodeId x) {
  NodeId id = push(Op::kTanh, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = std::tanh(in[i]);
  return id;
}

NodeId ValueGraph::add(NodeId a, NodeId b) {
  check_same_shape(a, b, "add");
  NodeId id = push(Op::kAdd, nodes_[a].rows, nodes_[a].cols, {a, b});
  const double* pa = val(a);
  const double* pb = val(b);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = pa[i] + pb[i];
  return id;
}

NodeId ValueGraph::sub(NodeId a, NodeId b) {
  check_same_shape(a, b, "sub");
  NodeId id = push(Op::kSub, nodes_[a].rows, nodes_[a].cols, {a, b});
  const double* pa = val(a);
  const double* pb = val(b);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = pa[i] - pb[i];
  return id;
}

NodeId ValueGraph::mul(NodeId a, NodeId b) {
  check_same_shape(a, b, "mul");
  NodeId id = push(Op::kMul, nodes_[a].rows, nodes_[a].cols, {a, b});
  const double* pa = val(a);
  const double* pb = val(b);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = pa[i] * pb[i];
  return id;
}

NodeId ValueGraph::scale(NodeId x, double c) {
  NodeId id = push(Op::kScale, nodes_[x].rows, nodes_[x].cols, {x}, c);
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = c * in[i];
  return id;
}

NodeId ValueGraph::add_const(NodeId x, double c) {
  NodeId id = push(Op::kAddConst, nodes_[x].rows, nodes_[x].cols, {x}, c);
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = in[i] + c;
  return id;
}

NodeId ValueGraph::neg(NodeId x) { return scale(x, -1.0); }

NodeId ValueGraph::exp(NodeId x) {
  NodeId id = push(Op::kExp, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = std::exp(in[i]);
  return id;
}

NodeId ValueGraph::log(NodeId x) {
  NodeId id = push(Op::kLog, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = std::log(in[i]);
  return id;
}

NodeId ValueGraph::abs(NodeId x) {
  NodeId id = push(Op::kAbs, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = std::fabs(in[i]);
  return id;
}

NodeId ValueGraph::sqrt(NodeId x) {
  NodeId id = push(Op::kSqrt, nodes_[x].rows, nodes_[x].cols, {x});
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) out[i] = std::sqrt(in[i]);
  return id;
}

NodeId ValueGraph::huber(NodeId x, double delta) {
  if (delta <= 0.0) throw ContractError("autodiff: huber delta must be positive");
  NodeId id = push(Op::kHuber, nodes_[x].rows, nodes_[x].cols, {x}, delta);
  const double* in = val(x);
  double* out = val(id);
  for (std::size_t i = 0, n = extent(id); i < n; ++i) {
    const double a = std::fabs(in[i]);
    out[i] = a <= delta ? 0.5 * in[i] * in[i] : delta * (a - 0.5 * delta);
  }
  return id;
}

NodeId ValueGraph::sum(NodeId x) {
  NodeId id = push(Op::kSum, 1, 1, {x});
  const double* in = val(x);
  double acc = 0.0;
  for (std::size_t i = 0, n = extent(x); i < n; ++i) acc += in[i];
  *val(id) = acc;
  return id;
}

NodeId ValueGraph::mean(NodeId x) {
  NodeId id = push(Op::kMean, 1, 1, {x});
  const double* in = val(x);
  double acc = 0.0;
  const std::size_t n = extent(x);
  for (std::size_t i = 0; i < n; ++i) acc += in[i];
  *val(id) = acc / static_cast<double>(n);
  return id;
}

NodeId ValueGraph::row_sum(NodeId x) {
  NodeId id = push(Op::kRowSum, nodes_[x].rows, 1, {x});
  const int c = nodes_[x].cols;
  const double* in = val(x);
  double* out = val(id);
  for (int r = 0; r < nodes_[x].rows; ++r) {
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += in[static_cast<std::size_t>(r) * c + j];
    out[r] = acc;
  }
  return id;
}

NodeId ValueGraph::logsumexp(NodeId x) {
  NodeId id = push(Op::kLogSumExp, 1, 1, {x});
  const double* in = val(x);
  const std::size_t n = extent(x);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, in[i]);
  if (!std::isfinite(m)) {
    *val(id) = m;  // all -inf (or a NaN/inf already present)
    return id;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(in[i] - m);
  *val(id) = m + std::log(s);
  return id;
}

NodeId ValueGraph::row_logsumexp(NodeId x) {
  NodeId id = push(Op::kRowLogSumExp, nodes_[x].rows, 1, {x});
  const int c = nodes_[x].cols;
  const double* in = val(x);
  double* out = val(id);
  for (int r = 0; r < nodes_[x].rows; ++r) {
    const double* row = in + static_cast<std::size_t>(r) * c;
    double m = row[0];
    for (int j = 1; j < c; ++j) m = std::max(m, row[j]);
    if (!std::isfinite(m)) {
      out[r] = m;
      continue;
    }
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += std::exp(row[j] - m);
    out[r] = m + std::log(s);
  }
  return id;
}

NodeId ValueGraph::row_softmax(NodeId x) {
  NodeId id = push(Op::kRowSoftmax, nodes_[x].rows, nodes_[x].cols, {x});
  const int c = nodes_[x].cols;
  const double* in = val(x);
  double* out = val(id);
  for (int r = 0; r < nodes_[x].rows; ++r) {
    const double* row = in + static_cast<std::size_t>(r) * c;
    double* orow = out + static_cast<std::size_t>(r) * c;
    double m = row[0];
    for (int j = 1; j < c; ++j) m = std::max(m, row[j]);
    double s = 0.0;
    for (int j = 0; j < c; ++j) {
      orow[j] = std::exp(row[j] - m);
      s += orow[j];
    }
    const double inv = 1.0 / s;
    for (int j = 0; j < c; ++j) orow[j] *= inv;
  }
  return id;
}

NodeId ValueGraph::row_log_softmax(NodeId x) {
  NodeId id = push(Op::kRowLogSoftmax, nodes_[x].rows, nodes_[x].cols, {x});
  const int c = nodes_[x].cols;
  const double* in = val(x);
  double* out = val(id);
  for (int r = 0; r < nodes_[x].rows; ++r) {
    const double* row = in + static_cast<std::size_t>(r) * c;
    double* orow = out + static_cast<std::size_t>(r) * c;
    double m = row[0];
    for (int j = 1; j < c; ++j) m = std::max(m, row[j]);
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += std::exp(row[j] - m);
    const double lse = m + std::log(s);
    for (int j = 0; j < c; ++j) orow[j] = row[j] - lse;
  }
  return id;
}

NodeId ValueGraph::matmul(NodeId a, NodeId b) {
  if (nodes_[a].cols != nodes_[b].rows) throw ContractError("autodiff: matmul inner dims differ");
  const int rr = nodes_[a].rows;
  const int kk = nodes_[a].cols;
  const int cc = nodes_[b].cols;
  NodeId id = push(Op::kMatMul, rr, cc, {a, b});
  const double* pa = val(a);
  const double* pb = val(b);
  double* out = val(id);
  std::memset(out, 0, sizeof(double) * extent(id));
  for (int r = 0; r < rr; ++r) {
    for (int k = 0; k < kk; ++k) {
      const double x = pa[static_cast<std::size_t>(r) * kk + k];
      const double* brow = pb + static_cast<std::size_t>(k) * cc;
      double* orow = out + static_cast<std::size_t>(r) * cc;
      for (int c = 0; c < cc; ++c) orow[c] += x * brow[c];
    }
  }
  return id;
}

NodeId ValueGraph::concat_cols(std::span<const NodeId> parts) {
  if (parts.empty()) throw ContractError("autodiff: concat_cols needs at least one part");
  const int rr = nodes_[parts[0]].rows;
  int total = 0;
  for (NodeId p : parts) {
    if (nodes_[p].rows != rr) throw ContractError("autodiff: concat_cols row mismatch");
    total += nodes_[p].cols;
  }
  NodeId id = push(Op::kConcatCols, rr, total, {parts.begin(), parts.end()});
  double* out = val(id);
  for (int r = 0; r < rr; ++r) {
    double* orow = out + static_cast<std::size_t>(r) * total;
    int at = 0;
    for (NodeId p : parts) {
      const int c = nodes_[p].cols;
      std::memcpy(orow + at, val(p) + static_cast<std::size_t>(r) * c, sizeof(double) * c);
      at += c;
    }
  }
  return id;
}

NodeId ValueGraph::augment_rows(NodeId head, NodeId tail) {
  if (nodes_[tail].rows != 1) throw ContractError("autodiff: augment_rows tail must be a single row");
  const int rr = nodes_[head].rows;
  const int a = nodes_[head].cols;
  const int b = nodes_[tail].cols;
  NodeId id = push(Op::kAugmentRows, rr, a + b, {head, tail});
  const double* ph = val(head);
  const double* pt = val(tail);
  double* out = val(id);
  for (int r = 0; r < rr; ++r) {
    double* orow = out + static_cast<std::size_t>(r) * (a + b);
    std::memcpy(orow, ph + static_cast<std::size_t>(r) * a, sizeof(double) * a);
    std::memcpy(orow + a, pt, sizeof(double) * b);
  }
  return id;
}

NodeId ValueGraph::slice_rows(NodeId x, int from, int count) {
  if (from < 0 || count < 1 || from + count > nodes_[x].rows) {
    throw ContractError("autodiff: slice_rows out of range");
  }
  const int c = nodes_[x].cols;
  NodeId id = push(Op::kSliceRows, count, c, {x}, 0.0, from);
  std::memcpy(val(id), val(x) + static_cast<std::size_t>(from) * c,
              sizeof(double) * static_cast<std::size_t>(count) * c);
  return id;
}

NodeId ValueGraph::gather(NodeId x, std::span<const int> col_index) {
  const int rr = nodes_[x].rows;
  const int cc = nodes_[x].cols;
  if (static_cast<int>(col_index.size()) != rr) {
    throw ContractError("autodiff: gather needs one column index per row");
  }
  const int at = static_cast<int>(index_arena_.size());
  for (int idx : col_index) {
    if (idx < 0 || idx >= cc) throw ContractError("autodiff: gather index out of range");
    index_arena_.push_back(idx);
  }
  NodeId id = push(Op::kGather, rr, 1, {x}, 0.0, at);
  const double* in = val(x);
  double* out = val(id);
  for (int r = 0; r < rr; ++r) out[r] = in[static_cast<std::size_t>(r) * cc + col_index[r]];
  return id;
}

void ValueGraph::backward(NodeId root, double seed) {
  if (extent(root) != 1) throw ContractError("autodiff: backward root must be scalar");
  grads_.assign(values_.size(), 0.0);
  grads_[nodes_[root].offset] = seed;
  for (NodeId id = root; id >= 0; --id) backward_node(id);
}

void ValueGraph::backward_node(NodeId id) {
  const Node& n = nodes_[id];
  const double* g = grads_.data() + n.offset;
  const std::size_t ext = extent(id);
  switch (n.op) {
    case Op::kLeaf:
      return;
    case Op::kAffine: {
      const NodeId xn = n.inputs[0], wn = n.inputs[1], bn = n.inputs[2];
      const int rr = n.rows;
      const int out_dim = n.cols;
      const int in_dim = nodes_[wn].cols;
      const double* x = val(xn);
      const double* w = val(wn);
      double* gx = grad(xn);
      double* gw = grad(wn);
      double* gb = grad(bn);
      for (int r = 0; r < rr; ++r) {
        const double* grow = g + static_cast<std::size_t>(r) * out_dim;
        const double* xrow = x + static_cast<std::size_t>(r) * in_dim;
        double* gxrow = gx + static_cast<std::size_t>(r) * in_dim;
        for (int j = 0; j < out_dim; ++j) {
          const double gj = grow[j];
          gb[j] += gj;
          const double* wrow = w + static_cast<std::size_t>(j) * in_dim;
          double* gwrow = gw + static_cast<std::size_t>(j) * in_dim;
          for (int k = 0; k < in_dim; ++k) {
            gwrow[k] += gj * xrow[k];
            gxrow[k] += gj * wrow[k];
          }
        }
      }
      return;
    }
    case Op::kRelu: {
      const double* out = val(id);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += out[i] > 0.0 ? g[i] : 0.0;
      return;
    }
    case Op::kTanh: {
      const double* out = val(id);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i] * (1.0 - out[i] * out[i]);
      return;
    }
    case Op::kAdd: {
      double* ga = grad(n.inputs[0]);
      double* gb = grad(n.inputs[1]);
      for (std::size_t i = 0; i < ext; ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
      return;
    }
    case Op::kSub: {
      double* ga = grad(n.inputs[0]);
      double* gb = grad(n.inputs[1]);
      for (std::size_t i = 0; i < ext; ++i) {
        ga[i] += g[i];
        gb[i] -= g[i];
      }
      return;
    }
    case Op::kMul: {
      const double* a = val(n.inputs[0]);
      const double* b = val(n.inputs[1]);
      double* ga = grad(n.inputs[0]);
      double* gb = grad(n.inputs[1]);
      for (std::size_t i = 0; i < ext; ++i) {
        ga[i] += g[i] * b[i];
        gb[i] += g[i] * a[i];
      }
      return;
    }
    case Op::kScale: {
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i] * n.payload;
      return;
    }
    case Op::kAddConst: {
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i];
      return;
    }
    case Op::kExp: {
      const double* out = val(id);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i] * out[i];
      return;
    }
    case Op::kLog: {
      const double* x = val(n.inputs[0]);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i] / x[i];
      return;
    }
    case Op::kAbs: {
      const double* x = val(n.inputs[0]);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) {
        if (x[i] > 0.0) gx[i] += g[i];
        else if (x[i] < 0.0) gx[i] -= g[i];
      }
      return;
    }
    case Op::kSqrt: {
      const double* out = val(id);
      double* gx = grad(n.inputs[0]);
      for (std::size_t i = 0; i < ext; ++i) {
        if (out[i] > 0.0) gx[i] += g[i] * 0.5 / out[i];
      }
      return;
    }
    case Op::kHuber: {
      const double* x = val(n.inputs[0]);
      double* gx = grad(n.inputs[0]);
      const double d = n.payload;
      for (std::size_t i = 0; i < ext; ++i) {
        const double e = x[i];
        gx[i] += g[i] * (std::fabs(e) <= d ? e : (e > 0.0 ? d : -d));
      }
      return;
    }
    case Op::kSum: {
      double* gx = grad(n.inputs[0]);
      const double gv = g[0];
      for (std::size_t i = 0, m = extent(n.inputs[0]); i < m; ++i) gx[i] += gv;
      return;
    }
    case Op::kMean: {
      double* gx = grad(n.inputs[0]);
      const std::size_t m = extent(n.inputs[0]);
      const double gv = g[0] / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) gx[i] += gv;
      return;
    }
    case Op::kRowSum: {
      const int c = nodes_[n.inputs[0]].cols;
      double* gx = grad(n.inputs[0]);
      for (int r = 0; r < n.rows; ++r) {
        const double gv = g[r];
        double* grow = gx + static_cast<std::size_t>(r) * c;
        for (int j = 0; j < c; ++j) grow[j] += gv;
      }
      return;
    }
    case Op::kLogSumExp: {
      const double* x = val(n.inputs[0]);
      const double out = *val(id);
      double* gx = grad(n.inputs[0]);
      const double gv = g[0];
      for (std::size_t i = 0, m = extent(n.inputs[0]); i < m; ++i) {
        gx[i] += gv * std::exp(x[i] - out);
      }
      return;
    }
    case Op::kRowLogSumExp: {
      const NodeId xn = n.inputs[0];
      const int c = nodes_[xn].cols;
      const double* x = val(xn);
      const double* out = val(id);
      double* gx = grad(xn);
      for (int r = 0; r < n.rows; ++r) {
        const double gv = g[r];
        const double o = out[r];
        const double* xrow = x + static_cast<std::size_t>(r) * c;
        double* grow = gx + static_cast<std::size_t>(r) * c;
        for (int j = 0; j < c; ++j) grow[j] += gv * std::exp(xrow[j] - o);
      }
      return;
    }
    case Op::kRowSoftmax: {
      const int c = n.cols;
      const double* p = val(id);
      double* gx = grad(n.inputs[0]);
      for (int r = 0; r < n.rows; ++r) {
        const double* prow = p + static_cast<std::size_t>(r) * c;
        const double* grow = g + static_cast<std::size_t>(r) * c;
        double* gxrow = gx + static_cast<std::size_t>(r) * c;
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += grow[j] * prow[j];
        for (int j = 0; j < c; ++j) gxrow[j] += prow[j] * (grow[j] - dot);
      }
      return;
    }
    case Op::kRowLogSoftmax: {
      const int c = n.cols;
      const double* out = val(id);
      double* gx = grad(n.inputs[0]);
      for (int r = 0; r < n.rows; ++r) {
        const double* orow = out + static_cast<std::size_t>(r) * c;
        const double* grow = g + static_cast<std::size_t>(r) * c;
        double* gxrow = gx + static_cast<std::size_t>(r) * c;
        double total = 0.0;
        for (int j = 0; j < c; ++j) total += grow[j];
        for (int j = 0; j < c; ++j) gxrow[j] += grow[j] - std::exp(orow[j]) * total;
      }
      return;
    }
    case Op::kMatMul: {
      const NodeId an = n.inputs[0], bn = n.inputs[1];
      const int rr = n.rows;
      const int cc = n.cols;
      const int kk = nodes_[an].cols;
      const double* a = val(an);
      const double* b = val(bn);
      double* ga = grad(an);
      double* gb = grad(bn);
      for (int r = 0; r < rr; ++r) {
        const double* grow = g + static_cast<std::size_t>(r) * cc;
        for (int k = 0; k < kk; ++k) {
          const double* brow = b + static_cast<std::size_t>(k) * cc;
          double s = 0.0;
          for (int c = 0; c < cc; ++c) s += grow[c] * brow[c];
          ga[static_cast<std::size_t>(r) * kk + k] += s;
          const double av = a[static_cast<std::size_t>(r) * kk + k];
          double* gbrow = gb + static_cast<std::size_t>(k) * cc;
          for (int c = 0; c < cc; ++c) gbrow[c] += av * grow[c];
        }
      }
      return;
    }
    case Op::kConcatCols: {
      const int total = n.cols;
      for (int r = 0; r < n.rows; ++r) {
        const double* grow = g + static_cast<std::size_t>(r) * total;
        int at = 0;
        for (NodeId p : n.inputs) {
          const int c = nodes_[p].cols;
          double* gp = grad(p) + static_cast<std::size_t>(r) * c;
          for (int j = 0; j < c; ++j) gp[j] += grow[at + j];
          at += c;
        }
      }
      return;
    }
    case Op::kAugmentRows: {
      const NodeId hn = n.inputs[0], tn = n.inputs[1];
      const int a = nodes_[hn].cols;
      const int b = nodes_[tn].cols;
      double* gh = grad(hn);
      double* gt = grad(tn);
      for (int r = 0; r < n.rows; ++r) {
        const double* grow = g + static_cast<std::size_t>(r) * (a + b);
        double* ghrow = gh + static_cast<std::size_t>(r) * a;
        for (int j = 0; j < a; ++j) ghrow[j] += grow[j];
        for (int j = 0; j < b; ++j) gt[j] += grow[a + j];
      }
      return;
    }
    case Op::kSliceRows: {
      const int c = n.cols;
      double* gx = grad(n.inputs[0]) + static_cast<std::size_t>(n.aux) * c;
      for (std::size_t i = 0; i < ext; ++i) gx[i] += g[i];
      return;
    }
    case Op::kGather: {
      const int cc = nodes_[n.inputs[0]].cols;
      double* gx = grad(n.inputs[0]);
      const int* idx = index_arena_.data() + n.aux;
      for (int r = 0; r < n.rows; ++r) {
        gx[static_cast<std::size_t>(r) * cc + idx[r]] += g[r];
      }
      return;
    }
  }
}

void ValueGraph::clear() {
  nodes_.clear();
  values_.clear();
  grads_.clear();
  index_arena_.clear();
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + s + "' (expected relu|tanh|identity)");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "identity";
}

Mlp Mlp::make(std::span<const int> dims, Activation hidden, Activation output, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("mlp needs at least [in, out] dims");
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    if (in < 1 || out < 1) throw ConfigError("mlp layer dims must be positive");
    DenseLayer layer;
    layer.weight = Matrix(out, in);
    layer.bias = Matrix(1, out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& w : layer.weight.data) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias.data) b = rng.uniform(-bound, bound);
    layer.activation = (i + 2 < dims.size()) ? hidden : output;
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Matrix Mlp::eval(const Matrix& input) const {
  if (layers.empty()) throw ConfigError("mlp has no layers");
  if (input.cols != input_dim()) {
    throw ConfigError("mlp input width does not match first layer fan-in");
  }
  Matrix cur = input;
  std::vector<double> wt;
  for (const DenseLayer& layer : layers) {
    Matrix next(cur.rows, layer.out_dim());
    affine_apply(cur.data.data(), cur.rows, layer.in_dim(), layer.weight.data.data(),
                 layer.bias.data.data(), layer.out_dim(), next.data.data(), wt);
    switch (layer.activation) {
      case Activation::kRelu:
        for (double& v : next.data) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::kTanh:
        for (double& v : next.data) v = std::tanh(v);
        break;
      case Activation::kIdentity:
        break;
    }
    cur = std::move(next);
  }
  return cur;
}

void Mlp::zero_last_layer() {
  DenseLayer& last = layers.back();
  std::fill(last.weight.data.begin(), last.weight.data.end(), 0.0);
  std::fill(last.bias.data.begin(), last.bias.data.end(), 0.0);
}

void Mlp::check_finite(const char* what) const {
  for (const DenseLayer& layer : layers) {
    if (!layer.weight.all_finite() || !layer.bias.all_finite()) {
      throw TrainingError(std::string("non-finite parameters in ") + what);
    }
  }
}

BoundMlp bind(ValueGraph& g, const Mlp& mlp) {
  BoundMlp bound;
  for (const DenseLayer& layer : mlp.layers) {
    bound.weights.push_back(g.input(layer.weight));
    bound.biases.push_back(g.input(layer.bias));
  }
  return bound;
}

NodeId forward(ValueGraph& g, const Mlp& mlp, const BoundMlp& bound, NodeId input) {
  if (g.cols(input) != mlp.input_dim()) {
    throw ConfigError("mlp input width does not match first layer fan-in");
  }
  NodeId cur = input;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    cur = g.affine(cur, bound.weights[i], bound.biases[i]);
    switch (mlp.layers[i].activation) {
      case Activation::kRelu:
        cur = g.relu(cur);
        break;
      case Activation::kTanh:
        cur = g.tanh(cur);
        break;
      case Activation::kIdentity:
        break;
    }
  }
  return cur;
}

void accumulate_gradients(const ValueGraph& g, const BoundMlp& bound,
                          std::span<Matrix> grad_accum, double scale) {
  if (grad_accum.size() != bound.weights.size() * 2) {
    throw ContractError("gradient accumulator count does not match bound mlp");
  }
  for (std::size_t i = 0; i < bound.weights.size(); ++i) {
    std::span<const double> gw = g.gradient(bound.weights[i]);
    std::span<const double> gb = g.gradient(bound.biases[i]);
    Matrix& aw = grad_accum[2 * i];
    Matrix& ab = grad_accum[2 * i + 1];
    for (std::size_t k = 0; k < gw.size(); ++k) aw.data[k] += scale * gw[k];
    for (std::size_t k = 0; k < gb.size(); ++k) ab.data[k] += scale * gb[k];
  }
}

std::vector<Matrix> zero_gradients_like(const Mlp& mlp) {
  std::vector<Matrix> out;
  for (const DenseLayer& layer : mlp.layers) {
    out.emplace_back(layer.weight.rows, layer.weight.cols);
    out.emplace_back(layer.bias.rows, layer.bias.cols);
  }
  return out;
}

AdamState make_adam_state(std::span<const Matrix* const> params) {
  AdamState state;
  for (const Matrix* p : params) {
    state.m.emplace_back(p->rows, p->cols);
    state.v.emplace_back(p->rows, p->cols);
  }
  return state;
}

void adam_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ContractError("adam_step: params/grads/state length mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows != grads[i]->rows || params[i]->cols != grads[i]->cols) {
      throw ContractError("adam_step: parameter/gradient shape mismatch");
    }
    if (!grads[i]->all_finite()) {
      throw TrainingError("adam_step: non-finite gradient at parameter " + std::to_string(i));
    }
  }
  state.step_count += 1;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m.data[k] = beta1 * m.data[k] + (1.0 - beta1) * g.data[k];
      v.data[k] = beta2 * v.data[k] + (1.0 - beta2) * g.data[k] * g.data[k];
      const double mhat = m.data[k] / c1;
      const double vhat = v.data[k] / c2;
      p.data[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace ebreg::ad
