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

#include "ebreg/models.hpp"

#include "ebreg/densities.hpp"

namespace ebreg {

std::string model_kind(const AnyModel& model) {
  struct Visitor {
    std::string operator()(const EnergyModel&) const { return "ebm"; }
    std::string operator()(const GaussianHead&) const { return "gaussian"; }
    std::string operator()(const LaplaceHead&) const { return "laplace"; }
    std::string operator()(const MdnHead&) const { return "mdn"; }
    std::string operator()(const SoftmaxHead&) const { return "softmax"; }
    std::string operator()(const DirectHead&) const { return "direct"; }
  };
  return std::visit(Visitor{}, model);
}

int model_input_dim(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.input_dim(); }, model);
}

int model_target_dim(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.target_dim(); }, model);
}

std::vector<Matrix*> model_parameters(AnyModel& model) {
  return std::visit([](auto& m) { return m.parameters(); }, model);
}

std::vector<const Matrix*> model_parameters(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.parameters(); }, model);
}

std::vector<std::string> model_parameter_names(const AnyModel& model) {
  return std::visit([](const auto& m) { return m.parameter_names(); }, model);
}

double baseline_log_density(const AnyModel& model, std::span<const double> x,
                            std::span<const double> y) {
  struct Visitor {
    std::span<const double> x;
    std::span<const double> y;

    double operator()(const EnergyModel&) const {
      throw ContractError(
          "baseline_log_density: the energy model needs a partition estimate; "
          "use the lattice-based metrics");
    }
    double operator()(const GaussianHead& m) const { return m.log_density(x, y); }
    double operator()(const LaplaceHead& m) const { return m.log_density(x, y); }
    double operator()(const MdnHead& m) const { return m.log_density(x, y); }
    double operator()(const SoftmaxHead& m) const { return m.log_density(x, y); }
    double operator()(const DirectHead& m) const {
      const std::vector<double> pred = m.predict(x);
      double lp = 0.0;
      for (std::size_t d = 0; d < y.size(); ++d) {
        lp += gaussian_log_pdf(y[d], pred[d], 1.0);
      }
      return lp;
    }
  };
  return std::visit(Visitor{x, y}, model);
}

}  // namespace ebreg
