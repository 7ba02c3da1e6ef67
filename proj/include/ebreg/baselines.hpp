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

#ifndef EBREG_BASELINES_HPP
#define EBREG_BASELINES_HPP

#include <span>
#include <string>
#include <vector>

#include "ebreg/autodiff.hpp"
#include "ebreg/common.hpp"
#include "ebreg/predict.hpp"

namespace ebreg {

enum class DirectLossKind { kL2, kHuber };

DirectLossKind direct_loss_from_string(const std::string& s);
std::string to_string(DirectLossKind k);

// ---- loss values (one example; trainers batch-average) ----

// L2 is the squared norm; Huber applies per coordinate and sums.
double direct_loss(std::span<const double> pred, std::span<const double> target,
                   DirectLossKind kind, double huber_delta = 1.0);

// (y - mu)^2 / sigma^2 + log sigma^2 summed over dims, averaged over rows.
// Note this drops the 1/2 log 2pi constant, matching the printed loss; the
// metrics layer reports the true NLL separately.
double gaussian_nll_loss(const Matrix& mu, const Matrix& log_var, const Matrix& y);

// Diagonal form: |y - mu| / beta + log beta summed over dims. The
// multivariate flag switches to the coupled form
// sqrt(sum_k (y_k - mu_k)^2 / beta_k) + sum_k log beta_k.
double laplace_nll_loss(const Matrix& mu, const Matrix& log_beta, const Matrix& y,
                        bool multivariate = false);

// -log sum_k w_k N(y; mu_k, sigma_k^2 I) for one example; mus/log_vars are
// [K x Dy], weights has K entries summing to 1.
double mdn_nll_loss(std::span<const double> weights, const Matrix& mus,
                    const Matrix& log_vars, std::span<const double> y);

struct SoftmaxLossValues {
  double ce = 0.0;
  double l2 = 0.0;
  double var = 0.0;
  double combined = 0.0;  // ce + 0.1 l2 (+ 0.05 var when enabled)
};

// One example, one target dim. CE targets the nearest class center.
SoftmaxLossValues softmax_losses(std::span<const double> logits, double y,
                                 std::span<const double> class_values,
                                 bool include_variance);

// Softmax expected value sum_c p_c * value_c.
double softmax_predict(std::span<const double> logits, std::span<const double> class_values);

int nearest_class(double y, std::span<const double> class_values);

// ---- graph-recorded losses (training path) ----

ad::NodeId direct_loss_graph(ad::ValueGraph& g, ad::NodeId pred, const Matrix& targets,
                             DirectLossKind kind, double huber_delta);

ad::NodeId gaussian_nll_graph(ad::ValueGraph& g, ad::NodeId mu, ad::NodeId log_var,
                              const Matrix& targets);

ad::NodeId laplace_nll_graph(ad::ValueGraph& g, ad::NodeId mu, ad::NodeId log_beta,
                             const Matrix& targets, bool multivariate);

// weight_logits is [R x K]; mus/log_vars hold one [R x Dy] node per component.
ad::NodeId mdn_nll_graph(ad::ValueGraph& g, ad::NodeId weight_logits,
                         std::span<const ad::NodeId> mus,
                         std::span<const ad::NodeId> log_vars, const Matrix& targets);

struct SoftmaxLossNodes {
  ad::NodeId ce;
  ad::NodeId l2;
  ad::NodeId var;
  ad::NodeId combined;
};

// Single target dim: logits [R x C], targets [R x 1].
SoftmaxLossNodes softmax_losses_graph(ad::ValueGraph& g, ad::NodeId logits,
                                      const Matrix& targets,
                                      std::span<const double> class_values,
                                      bool include_variance);

// ---- model heads ----

struct DirectHead {
  ad::Mlp backbone;
  ad::Mlp head;
  DirectLossKind loss_kind = DirectLossKind::kL2;
  double huber_delta = 1.0;

  static DirectHead make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                         ad::Activation activation, DirectLossKind kind, double huber_delta,
                         Rng& rng);
  int input_dim() const { return backbone.input_dim(); }
  int target_dim() const { return head.output_dim(); }
  std::vector<double> predict(std::span<const double> x) const;
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct GaussianHead {
  ad::Mlp backbone;
  ad::Mlp mu_head;
  ad::Mlp log_var_head;

  // The variance head's last layer starts at zero, so sigma^2 = 1 initially.
  static GaussianHead make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                           ad::Activation activation, Rng& rng);
  int input_dim() const { return backbone.input_dim(); }
  int target_dim() const { return mu_head.output_dim(); }
  // (mu, log sigma^2) per dim.
  std::pair<std::vector<double>, std::vector<double>> predict_params(
      std::span<const double> x) const;
  std::vector<double> predict(std::span<const double> x) const;  // the mean
  double log_density(std::span<const double> x, std::span<const double> y) const;
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct LaplaceHead {
  ad::Mlp backbone;
  ad::Mlp mu_head;
  ad::Mlp log_beta_head;
  bool multivariate = false;

  static LaplaceHead make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                          ad::Activation activation, bool multivariate, Rng& rng);
  int input_dim() const { return backbone.input_dim(); }
  int target_dim() const { return mu_head.output_dim(); }
  std::pair<std::vector<double>, std::vector<double>> predict_params(
      std::span<const double> x) const;
  std::vector<double> predict(std::span<const double> x) const;
  // Diagonal-product log-density; requires the diagonal (non-coupled) form.
  double log_density(std::span<const double> x, std::span<const double> y) const;
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct MdnHead {
  ad::Mlp backbone;
  std::vector<ad::Mlp> mu_heads;       // K heads, each ending in Dy
  std::vector<ad::Mlp> log_var_heads;  // K heads, each ending in Dy
  ad::Mlp weight_head;                 // ends in K logits

  static MdnHead make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                      int components, ad::Activation activation, Rng& rng);
  int input_dim() const { return backbone.input_dim(); }
  int target_dim() const { return mu_heads.front().output_dim(); }
  int components() const { return static_cast<int>(mu_heads.size()); }

  struct Params {
    std::vector<double> weights;  // softmax of the K logits
    Matrix mus;                   // [K x Dy]
    Matrix log_vars;              // [K x Dy]
  };
  Params predict_params(std::span<const double> x) const;
  std::vector<double> predict(std::span<const double> x) const;  // mixture mean
  double log_density(std::span<const double> x, std::span<const double> y) const;
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct SoftmaxHead {
  ad::Mlp backbone;
  std::vector<ad::Mlp> logit_heads;  // one per target dim, each ending in C
  std::vector<double> class_values;
  bool include_variance_loss = true;

  static SoftmaxHead make(std::span<const int> backbone_dims, std::span<const int> head_dims,
                          std::vector<double> class_values, int target_dims,
                          ad::Activation activation, bool include_variance, Rng& rng);
  int input_dim() const { return backbone.input_dim(); }
  int target_dim() const { return static_cast<int>(logit_heads.size()); }
  int classes() const { return static_cast<int>(class_values.size()); }
  Matrix logits(std::span<const double> x) const;  // [Dy x C]
  std::vector<double> predict(std::span<const double> x) const;
  // Piecewise-constant density over class cells.
  double log_density(std::span<const double> x, std::span<const double> y) const;
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

// Gradient-ascent refinement of a baseline's point prediction under a
// trained energy model for the same task.
std::vector<double> refine_baseline(const EnergyModel& ebm, std::span<const double> x,
                                    std::span<const double> y_hat, const RefineConfig& cfg);

}  // namespace ebreg

#endif  // EBREG_BASELINES_HPP
