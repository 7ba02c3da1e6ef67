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

#include "ebreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebreg/densities.hpp"

namespace ebreg {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

void append_params(std::vector<Matrix*>& out, ad::Mlp& mlp) {
  for (ad::DenseLayer& layer : mlp.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
}

void append_params(std::vector<const Matrix*>& out, const ad::Mlp& mlp) {
  for (const ad::DenseLayer& layer : mlp.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
}

void append_names(std::vector<std::string>& out, const std::string& prefix,
                  const ad::Mlp& mlp) {
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    out.push_back(prefix + "." + std::to_string(i) + ".weight");
    out.push_back(prefix + "." + std::to_string(i) + ".bias");
  }
}

std::vector<int> with_last(std::span<const int> dims, int last) {
  std::vector<int> out(dims.begin(), dims.end());
  out.back() = last;
  return out;
}

}  // namespace

DirectLossKind direct_loss_from_string(const std::string& s) {
  if (s == "l2") return DirectLossKind::kL2;
  if (s == "huber") return DirectLossKind::kHuber;
  throw ConfigError("unknown direct loss '" + s + "' (expected l2|huber)");
}

std::string to_string(DirectLossKind k) {
  return k == DirectLossKind::kL2 ? "l2" : "huber";
}

double direct_loss(std::span<const double> pred, std::span<const double> target,
                   DirectLossKind kind, double huber_delta) {
  if (pred.size() != target.size()) throw ContractError("direct_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t d = 0; d < pred.size(); ++d) {
    const double e = pred[d] - target[d];
    if (kind == DirectLossKind::kL2) {
      acc += e * e;
    } else {
      const double a = std::fabs(e);
      acc += a <= huber_delta ? 0.5 * e * e : huber_delta * (a - 0.5 * huber_delta);
    }
  }
  return acc;
}

double gaussian_nll_loss(const Matrix& mu, const Matrix& log_var, const Matrix& y) {
  if (mu.rows != y.rows || mu.cols != y.cols || log_var.rows != y.rows ||
      log_var.cols != y.cols) {
    throw ContractError("gaussian_nll_loss: shape mismatch");
  }
  double acc = 0.0;
  for (int r = 0; r < y.rows; ++r) {
    for (int c = 0; c < y.cols; ++c) {
      const double d = y.at(r, c) - mu.at(r, c);
      const double s = log_var.at(r, c);
      acc += d * d * std::exp(-s) + s;
    }
  }
  return acc / y.rows;
}

double laplace_nll_loss(const Matrix& mu, const Matrix& log_beta, const Matrix& y,
                        bool multivariate) {
  if (mu.rows != y.rows || mu.cols != y.cols || log_beta.rows != y.rows ||
      log_beta.cols != y.cols) {
    throw ContractError("laplace_nll_loss: shape mismatch");
  }
  double acc = 0.0;
  for (int r = 0; r < y.rows; ++r) {
    if (multivariate) {
      double q = 0.0;
      double logs = 0.0;
      for (int c = 0; c < y.cols; ++c) {
        const double d = y.at(r, c) - mu.at(r, c);
        q += d * d * std::exp(-log_beta.at(r, c));
        logs += log_beta.at(r, c);
      }
      acc += std::sqrt(q) + logs;
    } else {
      for (int c = 0; c < y.cols; ++c) {
        const double d = std::fabs(y.at(r, c) - mu.at(r, c));
        const double s = log_beta.at(r, c);
        acc += d * std::exp(-s) + s;
      }
    }
  }
  return acc / y.rows;
}

double mdn_nll_loss(std::span<const double> weights, const Matrix& mus,
                    const Matrix& log_vars, std::span<const double> y) {
  const int k = static_cast<int>(weights.size());
  if (k < 1) throw ContractError("mdn_nll_loss: needs at least one component");
  if (mus.rows != k || log_vars.rows != k || mus.cols != static_cast<int>(y.size()) ||
      log_vars.cols != mus.cols) {
    throw ContractError("mdn_nll_loss: shape mismatch");
  }
  std::vector<double> terms(k);
  for (int j = 0; j < k; ++j) {
    double lp = std::log(weights[j]);
    for (int d = 0; d < mus.cols; ++d) {
      lp += gaussian_log_pdf(y[d], mus.at(j, d), std::exp(log_vars.at(j, d)));
    }
    terms[j] = lp;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double t : terms) m = std::max(m, t);
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return -(m + std::log(s));
}

int nearest_class(double y, std::span<const double> class_values) {
  int best = 0;
  double best_d = std::fabs(y - class_values[0]);
  for (int c = 1; c < static_cast<int>(class_values.size()); ++c) {
    const double d = std::fabs(y - class_values[c]);
    if (d < best_d) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

SoftmaxLossValues softmax_losses(std::span<const double> logits, double y,
                                 std::span<const double> class_values,
                                 bool include_variance) {
  if (logits.size() != class_values.size()) {
    throw ContractError("softmax_losses: logits/class table size mismatch");
  }
  const int c = static_cast<int>(logits.size());
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  const double log_z = m + std::log(z);

  SoftmaxLossValues out;
  out.ce = log_z - logits[nearest_class(y, class_values)];
  double e = 0.0;
  double e2 = 0.0;
  for (int j = 0; j < c; ++j) {
    const double p = std::exp(logits[j] - log_z);
    e += p * class_values[j];
    e2 += p * class_values[j] * class_values[j];
  }
  out.l2 = (e - y) * (e - y);
  out.var = e2 - e * e;
  out.combined = out.ce + 0.1 * out.l2 + (include_variance ? 0.05 * out.var : 0.0);
  return out;
}

double softmax_predict(std::span<const double> logits, std::span<const double> class_values) {
  if (logits.size() != class_values.size()) {
    throw ContractError("softmax_predict: logits/class table size mismatch");
  }
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  double e = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    e += std::exp(logits[j] - m) / z * class_values[j];
  }
  return e;
}

ad::NodeId direct_loss_graph(ad::ValueGraph& g, ad::NodeId pred, const Matrix& targets,
                             DirectLossKind kind, double huber_delta) {
  const ad::NodeId y = g.input(targets);
  const ad::NodeId err = g.sub(pred, y);
  const ad::NodeId per_elem =
      kind == DirectLossKind::kL2 ? g.mul(err, err) : g.huber(err, huber_delta);
  return g.mean(g.row_sum(per_elem));
}

ad::NodeId gaussian_nll_graph(ad::ValueGraph& g, ad::NodeId mu, ad::NodeId log_var,
                              const Matrix& targets) {
  const ad::NodeId y = g.input(targets);
  const ad::NodeId d = g.sub(y, mu);
  const ad::NodeId term = g.add(g.mul(g.mul(d, d), g.exp(g.neg(log_var))), log_var);
  return g.mean(g.row_sum(term));
}

ad::NodeId laplace_nll_graph(ad::ValueGraph& g, ad::NodeId mu, ad::NodeId log_beta,
                             const Matrix& targets, bool multivariate) {
  const ad::NodeId y = g.input(targets);
  const ad::NodeId d = g.sub(y, mu);
  if (multivariate) {
    const ad::NodeId q = g.row_sum(g.mul(g.mul(d, d), g.exp(g.neg(log_beta))));
    return g.mean(g.add(g.sqrt(q), g.row_sum(log_beta)));
  }
  const ad::NodeId term = g.add(g.mul(g.abs(d), g.exp(g.neg(log_beta))), log_beta);
  return g.mean(g.row_sum(term));
}

ad::NodeId mdn_nll_graph(ad::ValueGraph& g, ad::NodeId weight_logits,
                         std::span<const ad::NodeId> mus,
                         std::span<const ad::NodeId> log_vars, const Matrix& targets) {
  const int k = static_cast<int>(mus.size());
  if (k < 1 || log_vars.size() != mus.size()) {
    throw ContractError("mdn_nll_graph: component list mismatch");
  }
  if (g.cols(weight_logits) != k) {
    throw ContractError("mdn_nll_graph: weight logits width must equal component count");
  }
  const ad::NodeId y = g.input(targets);
  const double dy = static_cast<double>(targets.cols);
  std::vector<ad::NodeId> cols;
  cols.reserve(k);
  for (int j = 0; j < k; ++j) {
    const ad::NodeId d = g.sub(y, mus[j]);
    const ad::NodeId quad = g.mul(g.mul(d, d), g.exp(g.neg(log_vars[j])));
    const ad::NodeId inner = g.scale(g.row_sum(g.add(log_vars[j], quad)), -0.5);
    cols.push_back(g.add_const(inner, -0.5 * kLog2Pi * dy));
  }
  const ad::NodeId comp = g.concat_cols(cols);                 // [R x K]
  const ad::NodeId log_w = g.row_log_softmax(weight_logits);   // [R x K]
  const ad::NodeId mix = g.row_logsumexp(g.add(log_w, comp));  // [R x 1]
  return g.scale(g.mean(mix), -1.0);
}

SoftmaxLossNodes softmax_losses_graph(ad::ValueGraph& g, ad::NodeId logits,
                                      const Matrix& targets,
                                      std::span<const double> class_values,
                                      bool include_variance) {
  const int rows = g.rows(logits);
  if (targets.rows != rows || targets.cols != 1) {
    throw ContractError("softmax_losses_graph: targets must be [rows x 1]");
  }
  if (g.cols(logits) != static_cast<int>(class_values.size())) {
    throw ContractError("softmax_losses_graph: logits width != class count");
  }
  std::vector<int> target_class(rows);
  for (int r = 0; r < rows; ++r) target_class[r] = nearest_class(targets.at(r, 0), class_values);

  SoftmaxLossNodes out;
  const ad::NodeId lsm = g.row_log_softmax(logits);
  out.ce = g.scale(g.mean(g.gather(lsm, target_class)), -1.0);

  Matrix v(static_cast<int>(class_values.size()), 1);
  Matrix v2(static_cast<int>(class_values.size()), 1);
  for (std::size_t j = 0; j < class_values.size(); ++j) {
    v.data[j] = class_values[j];
    v2.data[j] = class_values[j] * class_values[j];
  }
  const ad::NodeId probs = g.row_softmax(logits);
  const ad::NodeId expect = g.matmul(probs, g.input(v));    // [R x 1]
  const ad::NodeId expect_sq = g.matmul(probs, g.input(v2));
  const ad::NodeId y = g.input(targets);
  const ad::NodeId e_err = g.sub(expect, y);
  out.l2 = g.mean(g.mul(e_err, e_err));
  out.var = g.mean(g.sub(expect_sq, g.mul(expect, expect)));
  ad::NodeId combined = g.add(out.ce, g.scale(out.l2, 0.1));
  if (include_variance) combined = g.add(combined, g.scale(out.var, 0.05));
  out.combined = combined;
  return out;
}

// ---- DirectHead ----

DirectHead DirectHead::make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                            ad::Activation activation, DirectLossKind kind, double huber_delta,
                            Rng& rng) {
  DirectHead h;
  Rng rb = rng.child("backbone");
  Rng rh = rng.child("head");
  h.backbone = ad::Mlp::make(backbone_dims, activation, activation, rb);
  h.head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rh);
  h.loss_kind = kind;
  h.huber_delta = huber_delta;
  if (h.head.input_dim() != h.backbone.output_dim()) {
    throw ConfigError("direct head fan-in must match backbone feature dim");
  }
  return h;
}

std::vector<double> DirectHead::predict(std::span<const double> x) const {
  return head.eval(backbone.eval(Matrix::row(x))).data;
}

std::vector<Matrix*> DirectHead::parameters() {
  std::vector<Matrix*> out;
  append_params(out, backbone);
  append_params(out, head);
  return out;
}

std::vector<const Matrix*> DirectHead::parameters() const {
  std::vector<const Matrix*> out;
  append_params(out, backbone);
  append_params(out, head);
  return out;
}

std::vector<std::string> DirectHead::parameter_names() const {
  std::vector<std::string> out;
  append_names(out, "backbone", backbone);
  append_names(out, "head", head);
  return out;
}

// ---- GaussianHead ----

GaussianHead GaussianHead::make(std::span<const int> backbone_dims,
                                std::span<const int> head_dims, ad::Activation activation,
                                Rng& rng) {
  GaussianHead h;
  Rng rb = rng.child("backbone");
  Rng rm = rng.child("mu_head");
  Rng rv = rng.child("log_var_head");
  h.backbone = ad::Mlp::make(backbone_dims, activation, activation, rb);
  h.mu_head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rm);
  h.log_var_head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rv);
  h.log_var_head.zero_last_layer();
  if (h.mu_head.input_dim() != h.backbone.output_dim()) {
    throw ConfigError("gaussian heads fan-in must match backbone feature dim");
  }
  return h;
}

std::pair<std::vector<double>, std::vector<double>> GaussianHead::predict_params(
    std::span<const double> x) const {
  const Matrix feat = backbone.eval(Matrix::row(x));
  return {mu_head.eval(feat).data, log_var_head.eval(feat).data};
}

std::vector<double> GaussianHead::predict(std::span<const double> x) const {
  return predict_params(x).first;
}

double GaussianHead::log_density(std::span<const double> x, std::span<const double> y) const {
  const auto [mu, log_var] = predict_params(x);
  double lp = 0.0;
  for (std::size_t d = 0; d < y.size(); ++d) {
    lp += gaussian_log_pdf(y[d], mu[d], std::exp(log_var[d]));
  }
  return lp;
}

std::vector<Matrix*> GaussianHead::parameters() {
  std::vector<Matrix*> out;
  append_params(out, backbone);
  append_params(out, mu_head);
  append_params(out, log_var_head);
  return out;
}

std::vector<const Matrix*> GaussianHead::parameters() const {
  std::vector<const Matrix*> out;
  append_params(out, backbone);
  append_params(out, mu_head);
  append_params(out, log_var_head);
  return out;
}

std::vector<std::string> GaussianHead::parameter_names() const {
  std::vector<std::string> out;
  append_names(out, "backbone", backbone);
  append_names(out, "mu_head", mu_head);
  append_names(out, "log_var_head", log_var_head);
  return out;
}

// ---- LaplaceHead ----

LaplaceHead LaplaceHead::make(std::span<const int> backbone_dims,
                              std::span<const int> head_dims, ad::Activation activation,
                              bool multivariate, Rng& rng) {
  LaplaceHead h;
  Rng rb = rng.child("backbone");
  Rng rm = rng.child("mu_head");
  Rng rv = rng.child("log_beta_head");
  h.backbone = ad::Mlp::make(backbone_dims, activation, activation, rb);
  h.mu_head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rm);
  h.log_beta_head = ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rv);
  h.log_beta_head.zero_last_layer();
  h.multivariate = multivariate;
  if (h.mu_head.input_dim() != h.backbone.output_dim()) {
    throw ConfigError("laplace heads fan-in must match backbone feature dim");
  }
  return h;
}

std::pair<std::vector<double>, std::vector<double>> LaplaceHead::predict_params(
    std::span<const double> x) const {
  const Matrix feat = backbone.eval(Matrix::row(x));
  return {mu_head.eval(feat).data, log_beta_head.eval(feat).data};
}

std::vector<double> LaplaceHead::predict(std::span<const double> x) const {
  return predict_params(x).first;
}

double LaplaceHead::log_density(std::span<const double> x, std::span<const double> y) const {
  if (multivariate) {
    throw ContractError("laplace log_density: coupled multivariate form is not a product density");
  }
  const auto [mu, log_beta] = predict_params(x);
  double lp = 0.0;
  for (std::size_t d = 0; d < y.size(); ++d) {
    lp += laplace_log_pdf(y[d], mu[d], std::exp(log_beta[d]));
  }
  return lp;
}

std::vector<Matrix*> LaplaceHead::parameters() {
  std::vector<Matrix*> out;
  append_params(out, backbone);
  append_params(out, mu_head);
  append_params(out, log_beta_head);
  return out;
}

std::vector<const Matrix*> LaplaceHead::parameters() const {
  std::vector<const Matrix*> out;
  append_params(out, backbone);
  append_params(out, mu_head);
  append_params(out, log_beta_head);
  return out;
}

std::vector<std::string> LaplaceHead::parameter_names() const {
  std::vector<std::string> out;
  append_names(out, "backbone", backbone);
  append_names(out, "mu_head", mu_head);
  append_names(out, "log_beta_head", log_beta_head);
  return out;
}

// ---- MdnHead ----

MdnHead MdnHead::make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                      int components, ad::Activation activation, Rng& rng) {
  if (components < 1) throw ConfigError("mdn needs at least one component");
  MdnHead h;
  Rng rb = rng.child("backbone");
  h.backbone = ad::Mlp::make(backbone_dims, activation, activation, rb);
  for (int k = 0; k < components; ++k) {
    Rng rm = rng.child("mu_head").child(static_cast<std::uint64_t>(k));
    Rng rv = rng.child("log_var_head").child(static_cast<std::uint64_t>(k));
    h.mu_heads.push_back(ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rm));
    h.log_var_heads.push_back(
        ad::Mlp::make(head_dims, activation, ad::Activation::kIdentity, rv));
    h.log_var_heads.back().zero_last_layer();
  }
  Rng rw = rng.child("weight_head");
  h.weight_head = ad::Mlp::make(with_last(head_dims, components), activation,
                                ad::Activation::kIdentity, rw);
  if (h.mu_heads.front().input_dim() != h.backbone.output_dim()) {
    throw ConfigError("mdn heads fan-in must match backbone feature dim");
  }
  return h;
}

MdnHead::Params MdnHead::predict_params(std::span<const double> x) const {
  const Matrix feat = backbone.eval(Matrix::row(x));
  Params p;
  p.mus = Matrix(components(), target_dim());
  p.log_vars = Matrix(components(), target_dim());
  for (int k = 0; k < components(); ++k) {
    const Matrix mu = mu_heads[k].eval(feat);
    const Matrix lv = log_var_heads[k].eval(feat);
    for (int d = 0; d < target_dim(); ++d) {
      p.mus.at(k, d) = mu.data[d];
      p.log_vars.at(k, d) = lv.data[d];
    }
  }
  const Matrix logits = weight_head.eval(feat);
  double m = logits.data[0];
  for (double v : logits.data) m = std::max(m, v);
  double z = 0.0;
  p.weights.resize(components());
  for (int k = 0; k < components(); ++k) {
    p.weights[k] = std::exp(logits.data[k] - m);
    z += p.weights[k];
  }
  for (double& w : p.weights) w /= z;
  return p;
}

std::vector<double> MdnHead::predict(std::span<const double> x) const {
  const Params p = predict_params(x);
  std::vector<double> mean(target_dim(), 0.0);
  for (int k = 0; k < components(); ++k) {
    for (int d = 0; d < target_dim(); ++d) mean[d] += p.weights[k] * p.mus.at(k, d);
  }
  return mean;
}

double MdnHead::log_density(std::span<const double> x, std::span<const double> y) const {
  const Params p = predict_params(x);
  return -mdn_nll_loss(p.weights, p.mus, p.log_vars, y);
}

std::vector<Matrix*> MdnHead::parameters() {
  std::vector<Matrix*> out;
  append_params(out, backbone);
  for (ad::Mlp& m : mu_heads) append_params(out, m);
  for (ad::Mlp& m : log_var_heads) append_params(out, m);
  append_params(out, weight_head);
  return out;
}

std::vector<const Matrix*> MdnHead::parameters() const {
  std::vector<const Matrix*> out;
  append_params(out, backbone);
  for (const ad::Mlp& m : mu_heads) append_params(out, m);
  for (const ad::Mlp& m : log_var_heads) append_params(out, m);
  append_params(out, weight_head);
  return out;
}

std::vector<std::string> MdnHead::parameter_names() const {
  std::vector<std::string> out;
  append_names(out, "backbone", backbone);
  for (std::size_t k = 0; k < mu_heads.size(); ++k) {
    append_names(out, "mu_head_" + std::to_string(k), mu_heads[k]);
  }
  for (std::size_t k = 0; k < log_var_heads.size(); ++k) {
    append_names(out, "log_var_head_" + std::to_string(k), log_var_heads[k]);
  }
  append_names(out, "weight_head", weight_head);
  return out;
}

// ---- SoftmaxHead ----

SoftmaxHead SoftmaxHead::make(std::span<const int> backbone_dims,
                              std::span<const int> head_dims,
                              std::vector<double> class_values, int target_dims,
                              ad::Activation activation, bool include_variance, Rng& rng) {
  if (class_values.size() < 2) throw ConfigError("softmax needs at least two classes");
  for (std::size_t j = 1; j < class_values.size(); ++j) {
    if (!(class_values[j] > class_values[j - 1])) {
      throw ConfigError("softmax class values must be strictly increasing");
    }
  }
  SoftmaxHead h;
  Rng rb = rng.child("backbone");
  h.backbone = ad::Mlp::make(backbone_dims, activation, activation, rb);
  const std::vector<int> dims = with_last(head_dims, static_cast<int>(class_values.size()));
  for (int d = 0; d < target_dims; ++d) {
    Rng rl = rng.child("logit_head").child(static_cast<std::uint64_t>(d));
    h.logit_heads.push_back(ad::Mlp::make(dims, activation, ad::Activation::kIdentity, rl));
  }
  h.class_values = std::move(class_values);
  h.include_variance_loss = include_variance;
  if (h.logit_heads.front().input_dim() != h.backbone.output_dim()) {
    throw ConfigError("softmax heads fan-in must match backbone feature dim");
  }
  return h;
}

Matrix SoftmaxHead::logits(std::span<const double> x) const {
  const Matrix feat = backbone.eval(Matrix::row(x));
  Matrix out(target_dim(), classes());
  for (int d = 0; d < target_dim(); ++d) {
    const Matrix row = logit_heads[d].eval(feat);
    for (int c = 0; c < classes(); ++c) out.at(d, c) = row.data[c];
  }
  return out;
}

std::vector<double> SoftmaxHead::predict(std::span<const double> x) const {
  const Matrix l = logits(x);
  std::vector<double> out(target_dim());
  for (int d = 0; d < target_dim(); ++d) {
    out[d] = softmax_predict(l.row_span(d), class_values);
  }
  return out;
}

double SoftmaxHead::log_density(std::span<const double> x, std::span<const double> y) const {
  const Matrix l = logits(x);
  const double width = class_values[1] - class_values[0];
  double lp = 0.0;
  for (int d = 0; d < target_dim(); ++d) {
    if (y[d] < class_values.front() - 0.5 * width ||
        y[d] > class_values.back() + 0.5 * width) {
      return -std::numeric_limits<double>::infinity();
    }
    const int c = nearest_class(y[d], class_values);
    std::span<const double> row = l.row_span(d);
    double m = row[0];
    for (double v : row) m = std::max(m, v);
    double z = 0.0;
    for (double v : row) z += std::exp(v - m);
    lp += row[c] - m - std::log(z) - std::log(width);
  }
  return lp;
}

std::vector<Matrix*> SoftmaxHead::parameters() {
  std::vector<Matrix*> out;
  append_params(out, backbone);
  for (ad::Mlp& m : logit_heads) append_params(out, m);
  return out;
}

std::vector<const Matrix*> SoftmaxHead::parameters() const {
  std::vector<const Matrix*> out;
  append_params(out, backbone);
  for (const ad::Mlp& m : logit_heads) append_params(out, m);
  return out;
}

std::vector<std::string> SoftmaxHead::parameter_names() const {
  std::vector<std::string> out;
  append_names(out, "backbone", backbone);
  for (std::size_t d = 0; d < logit_heads.size(); ++d) {
    append_names(out, "logit_head_" + std::to_string(d), logit_heads[d]);
  }
  return out;
}

std::vector<double> refine_baseline(const EnergyModel& ebm, std::span<const double> x,
                                    std::span<const double> y_hat, const RefineConfig& cfg) {
  return refine(ebm, x, y_hat, cfg).y;
}

}  // namespace ebreg
