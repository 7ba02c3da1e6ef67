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

#ifndef EBREG_AUTODIFF_HPP
#define EBREG_AUTODIFF_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ebreg/common.hpp"
#include "ebreg/rng.hpp"

namespace ebreg::ad {

using NodeId = std::int32_t;

// Reverse-mode tape over f64 matrices. Nodes are appended in evaluation
// order, so ids are already a topological order; backward() walks them in
// reverse. Values are computed eagerly when an op is recorded.
//
// No implicit broadcasting: every op states its shape rule and throws
// ContractError on mismatch.
class ValueGraph {
 public:
  ValueGraph() = default;

  // Leaves. input(rows, cols) leaves the values uninitialized for the
  // caller to fill through value_mut().
  NodeId input(int rows, int cols);
  NodeId input(const Matrix& m);
  NodeId scalar(double v);

  int rows(NodeId id) const { return nodes_[id].rows; }
  int cols(NodeId id) const { return nodes_[id].cols; }
  std::size_t node_count() const { return nodes_.size(); }

  std::span<double> value_mut(NodeId id);
  std::span<const double> value(NodeId id) const;
  std::span<const double> gradient(NodeId id) const;
  double scalar_value(NodeId id) const;

  // y = x W^T + b, applied to every row of x. w is [out x in], b is [1 x out].
  NodeId affine(NodeId x, NodeId w, NodeId b);

  NodeId relu(NodeId x);
  NodeId tanh(NodeId x);

  // Elementwise; shapes must match exactly.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);

  NodeId scale(NodeId x, double c);
  NodeId add_const(NodeId x, double c);
  NodeId neg(NodeId x);
  NodeId exp(NodeId x);
  NodeId log(NodeId x);
  NodeId abs(NodeId x);
  // Subgradient at 0 is 0, matching the relu/abs convention.
  NodeId sqrt(NodeId x);
  // Huber penalty per element: e^2/2 for |e| <= delta, delta*(|e| - delta/2) above.
  NodeId huber(NodeId x, double delta);

  NodeId sum(NodeId x);
  NodeId mean(NodeId x);
  NodeId row_sum(NodeId x);  // [R x C] -> [R x 1]

  // log sum exp over all elements, max-shifted.
  NodeId logsumexp(NodeId x);
  NodeId row_logsumexp(NodeId x);    // [R x C] -> [R x 1]
  NodeId row_softmax(NodeId x);      // [R x C] -> [R x C], rows sum to 1
  NodeId row_log_softmax(NodeId x);  // [R x C] -> [R x C]

  NodeId matmul(NodeId a, NodeId b);  // [R x K] * [K x C]

  NodeId concat_cols(std::span<const NodeId> parts);
  // Append the single row `tail` [1 x b] to every row of head [R x a].
  NodeId augment_rows(NodeId head, NodeId tail);
  NodeId slice_rows(NodeId x, int from, int count);
  // out[r] = x[r, index[r]].
  NodeId gather(NodeId x, std::span<const int> col_index);

  // Populates d(root)/d(node) for every node feeding root. root must be
  // scalar. Gradient slots are zeroed on entry; the root's slot receives
  // `seed` (1.0 computes plain derivatives).
  void backward(NodeId root, double seed = 1.0);

  // Drops all nodes but keeps allocated capacity for reuse.
  void clear();

 private:
  enum class Op : std::uint8_t {
    kLeaf,
    kAffine,
    kRelu,
    kTanh,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddConst,
    kExp,
    kLog,
    kAbs,
    kSqrt,
    kHuber,
    kSum,
    kMean,
    kRowSum,
    kLogSumExp,
    kRowLogSumExp,
    kRowSoftmax,
    kRowLogSoftmax,
    kMatMul,
    kConcatCols,
    kAugmentRows,
    kSliceRows,
    kGather,
  };

  struct Node {
    Op op;
    int rows;
    int cols;
    std::size_t offset;  // into values_ / grads_
    double payload = 0.0;
    int aux = 0;  // slice start, or offset into index_arena_
    std::vector<NodeId> inputs;
  };

  NodeId push(Op op, int rows, int cols, std::vector<NodeId> ins,
              double payload = 0.0, int aux = 0);
  double* val(NodeId id) { return values_.data() + nodes_[id].offset; }
  const double* val(NodeId id) const { return values_.data() + nodes_[id].offset; }
  double* grad(NodeId id) { return grads_.data() + nodes_[id].offset; }
  std::size_t extent(NodeId id) const {
    return static_cast<std::size_t>(nodes_[id].rows) * nodes_[id].cols;
  }
  void check_same_shape(NodeId a, NodeId b, const char* what) const;
  void backward_node(NodeId id);

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<int> index_arena_;
  std::vector<double> scratch_;
};

enum class Activation { kIdentity, kRelu, kTanh };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

struct DenseLayer {
  Matrix weight;  // [out x in]
  Matrix bias;    // [1 x out]
  Activation activation = Activation::kIdentity;

  int in_dim() const { return weight.cols; }
  int out_dim() const { return weight.rows; }
};

// Plain feed-forward stack of dense layers.
struct Mlp {
  std::vector<DenseLayer> layers;

  int input_dim() const { return layers.front().in_dim(); }
  int output_dim() const { return layers.back().out_dim(); }

  // Uniform init on +-1/sqrt(fan_in) for weights and biases, deterministic
  // given the rng stream. `hidden` is applied after every layer except the
  // last, which gets `output`.
  static Mlp make(std::span<const int> dims, Activation hidden,
                  Activation output, Rng& rng);

  // Forward without a tape; arithmetic is identical to the graph path.
  Matrix eval(const Matrix& input) const;

  void zero_last_layer();
  void check_finite(const char* what) const;
};

// Parameter leaves of one Mlp recorded on a graph.
struct BoundMlp {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
};

BoundMlp bind(ValueGraph& g, const Mlp& mlp);

// Graph-recorded forward pass over every row of `input`.
NodeId forward(ValueGraph& g, const Mlp& mlp, const BoundMlp& bound, NodeId input);

// grad_accum holds one matrix per parameter in bind order
// (w0, b0, w1, b1, ...); gradients are scaled and added in place.
void accumulate_gradients(const ValueGraph& g, const BoundMlp& bound,
                          std::span<Matrix> grad_accum, double scale);

std::vector<Matrix> zero_gradients_like(const Mlp& mlp);

// Bias-corrected ADAM. params/grads/state must have matching shapes.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long step_count = 0;
};

AdamState make_adam_state(std::span<const Matrix* const> params);

void adam_step(std::span<Matrix* const> params,
               std::span<const Matrix* const> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

}  // namespace ebreg::ad

#endif  // EBREG_AUTODIFF_HPP
