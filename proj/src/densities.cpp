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

#include "ebreg/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ebreg {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}
}  // namespace

double gaussian_log_pdf(double y, double mu, double var) {
  if (var <= 0.0) throw ContractError("gaussian_log_pdf: variance must be positive");
  const double d = y - mu;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
}

double laplace_log_pdf(double y, double mu, double beta) {
  if (beta <= 0.0) throw ContractError("laplace_log_pdf: scale must be positive");
  return -std::log(2.0 * beta) - std::fabs(y - mu) / beta;
}

double lognormal_log_pdf(double y, double mu, double sigma) {
  if (sigma <= 0.0) throw ContractError("lognormal_log_pdf: sigma must be positive");
  if (y <= 0.0) return -std::numeric_limits<double>::infinity();
  const double ly = std::log(y);
  const double d = ly - mu;
  return -ly - std::log(sigma) - 0.5 * kLog2Pi - 0.5 * d * d / (sigma * sigma);
}

void Proposal::validate() const {
  if (sigmas.empty()) throw ConfigError("proposal needs at least one component");
  if (dim < 1) throw ConfigError("proposal dim must be >= 1");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw ConfigError("proposal sigmas must all be positive");
  }
}

double proposal_log_density(std::span<const double> y, std::span<const double> center,
                            const Proposal& p) {
  if (static_cast<int>(y.size()) != p.dim || static_cast<int>(center.size()) != p.dim) {
    throw ContractError("proposal_log_density: dimension mismatch");
  }
  double sq = 0.0;
  for (int d = 0; d < p.dim; ++d) {
    const double diff = y[d] - center[d];
    sq += diff * diff;
  }
  const double log_weight = -std::log(static_cast<double>(p.components()));
  std::vector<double> terms(p.sigmas.size());
  for (std::size_t l = 0; l < p.sigmas.size(); ++l) {
    const double var = p.sigmas[l] * p.sigmas[l];
    terms[l] = log_weight - 0.5 * p.dim * (kLog2Pi + std::log(var)) - 0.5 * sq / var;
  }
  return logsumexp(terms);
}

std::vector<std::vector<double>> sample_proposal(std::span<const double> center,
                                                 const Proposal& p, int m, Rng& rng) {
  if (m < 1) throw ContractError("sample_proposal: M must be >= 1");
  if (static_cast<int>(center.size()) != p.dim) {
    throw ContractError("sample_proposal: center dimension mismatch");
  }
  std::vector<std::vector<double>> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    const double sigma = p.sigmas[rng.uniform_int(p.components())];
    std::vector<double> y(p.dim);
    for (int d = 0; d < p.dim; ++d) y[d] = center[d] + sigma * rng.normal();
    out.push_back(std::move(y));
  }
  return out;
}

GroundTruthDensity GroundTruthDensity::defaults() {
  GroundTruthDensity d;
  d.mixture = {
      {0.2, -1.5, -0.5, 0.35},
      {0.8, 1.5, 0.5, 0.35},
  };
  d.lognormal_mu = 0.0;
  d.lognormal_sigma = 0.25;
  return d;
}

double GroundTruthDensity::component_mean(const MixtureComponent& c, double x) const {
  return c.mean_base + c.mean_sin_coeff * std::sin(M_PI * x / 3.0);
}

double GroundTruthDensity::log_density(double x, double y) const {
  if (x >= 0.0) return lognormal_log_pdf(y, lognormal_mu, lognormal_sigma);
  std::vector<double> terms(mixture.size());
  for (std::size_t j = 0; j < mixture.size(); ++j) {
    const MixtureComponent& c = mixture[j];
    terms[j] = std::log(c.weight) +
               gaussian_log_pdf(y, component_mean(c, x), c.std_dev * c.std_dev);
  }
  return logsumexp(terms);
}

double GroundTruthDensity::sample(double x, Rng& rng) const {
  if (x >= 0.0) return std::exp(lognormal_mu + lognormal_sigma * rng.normal());
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t pick = mixture.size() - 1;
  for (std::size_t j = 0; j < mixture.size(); ++j) {
    cum += mixture[j].weight;
    if (u < cum) {
      pick = j;
      break;
    }
  }
  const MixtureComponent& c = mixture[pick];
  return component_mean(c, x) + c.std_dev * rng.normal();
}

std::function<double(double)> GroundTruthDensity::conditional(double x) const {
  return [this, x](double y) { return log_density(x, y); };
}

std::pair<double, double> GroundTruthDensity::support_hint() const {
  double lo = 0.0;
  double hi = std::exp(lognormal_mu + 8.0 * lognormal_sigma);
  for (const MixtureComponent& c : mixture) {
    const double reach = std::fabs(c.mean_sin_coeff) + 10.0 * c.std_dev;
    lo = std::min(lo, c.mean_base - reach);
    hi = std::max(hi, c.mean_base + reach);
  }
  return {lo, hi};
}

void GroundTruthDensity::validate() const {
  if (mixture.empty()) throw ConfigError("ground truth mixture branch needs components");
  double wsum = 0.0;
  for (const MixtureComponent& c : mixture) {
    if (!(c.weight > 0.0)) throw ConfigError("ground truth mixture weights must be positive");
    if (!(c.std_dev > 0.0)) throw ConfigError("ground truth mixture std devs must be positive");
    wsum += c.weight;
  }
  if (std::fabs(wsum - 1.0) > 1e-9) {
    throw ConfigError("ground truth mixture weights must sum to 1 (got " +
                      std::to_string(wsum) + ")");
  }
  if (!(lognormal_sigma > 0.0)) throw ConfigError("ground truth log-normal sigma must be positive");

  const auto [lo, hi] = support_hint();
  for (double x : {-2.9, -1.5, -0.1, 0.0, 1.3, 2.9}) {
    const double mass = simpson_integrate(
        [this, x](double y) { return std::exp(log_density(x, y)); },
        std::min(lo, -1.0), std::max(hi, 1.0), 40000);
    if (std::fabs(mass - 1.0) > 1e-6) {
      throw ConfigError("ground truth branch at x=" + std::to_string(x) +
                        " does not integrate to 1 (got " + std::to_string(mass) + ")");
    }
  }
}

double simpson_integrate(const std::function<double(double)>& f, double lo, double hi,
                         int intervals) {
  if (intervals < 2) intervals = 2;
  if (intervals % 2 != 0) intervals += 1;
  const double h = (hi - lo) / intervals;
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) {
    acc += f(lo + i * h) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return acc * h / 3.0;
}

}  // namespace ebreg
