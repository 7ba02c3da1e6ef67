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

#ifndef EBREG_DENSITIES_HPP
#define EBREG_DENSITIES_HPP

#include <functional>
#include <span>
#include <vector>

#include "ebreg/common.hpp"
#include "ebreg/rng.hpp"

namespace ebreg {

double gaussian_log_pdf(double y, double mu, double var);
double laplace_log_pdf(double y, double mu, double beta);
// Returns -inf for y <= 0.
double lognormal_log_pdf(double y, double mu, double sigma);

// Equally weighted Gaussian mixture centered at the conditioning point:
// q(y | c) = (1/L) sum_l N(y; c, sigma_l^2 I).
struct Proposal {
  std::vector<double> sigmas;
  int dim = 1;

  int components() const { return static_cast<int>(sigmas.size()); }
  void validate() const;
};

// Stable log q(y | center) via log-sum-exp over components.
double proposal_log_density(std::span<const double> y, std::span<const double> center,
                            const Proposal& p);

// Each draw picks a component uniformly, then adds sigma_l * eps with
// eps ~ N(0, I). Deterministic given the rng stream.
std::vector<std::vector<double>> sample_proposal(std::span<const double> center,
                                                 const Proposal& p, int m, Rng& rng);

// One mixture component of the bimodal branch; the mean may drift with x:
// mean(x) = mean_base + mean_sin_coeff * sin(pi * x / 3).
struct MixtureComponent {
  double weight = 0.0;
  double mean_base = 0.0;
  double mean_sin_coeff = 0.0;
  double std_dev = 1.0;
};

// Ground-truth conditional target density of the 1D benchmark: a bimodal
// Gaussian mixture for x < 0 and a log-normal for x >= 0. The mixture
// branch parameters are configuration, not fixed constants; defaults()
// gives a clearly separated bimodal shape.
struct GroundTruthDensity {
  std::vector<MixtureComponent> mixture;
  double lognormal_mu = 0.0;
  double lognormal_sigma = 0.25;

  static GroundTruthDensity defaults();

  double component_mean(const MixtureComponent& c, double x) const;
  double log_density(double x, double y) const;
  double sample(double x, Rng& rng) const;

  // log p(y | x) for the branch selected by the sign of x.
  std::function<double(double)> conditional(double x) const;

  // A y-range covering all branch supports, for quadrature and grids.
  std::pair<double, double> support_hint() const;

  // Checks weights and that each branch integrates to 1 (quadrature,
  // tolerance 1e-6); throws ConfigError otherwise.
  void validate() const;
};

// Composite Simpson rule; intervals is rounded up to an even count.
double simpson_integrate(const std::function<double(double)>& f, double lo, double hi,
                         int intervals);

}  // namespace ebreg

#endif  // EBREG_DENSITIES_HPP
