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

#ifndef EBREG_MODELS_HPP
#define EBREG_MODELS_HPP

#include <string>
#include <variant>
#include <vector>

#include "ebreg/baselines.hpp"
#include "ebreg/ebm.hpp"

namespace ebreg {

using AnyModel =
    std::variant<EnergyModel, GaussianHead, LaplaceHead, MdnHead, SoftmaxHead, DirectHead>;

std::string model_kind(const AnyModel& model);
int model_input_dim(const AnyModel& model);
int model_target_dim(const AnyModel& model);

std::vector<Matrix*> model_parameters(AnyModel& model);
std::vector<const Matrix*> model_parameters(const AnyModel& model);
std::vector<std::string> model_parameter_names(const AnyModel& model);

// Pointwise conditional log-density. The energy model needs a partition
// estimate, so it is handled by the grid-aware metrics paths instead and
// rejected here. Direct regression is read as the fixed-variance Gaussian
// its L2 loss corresponds to (unit variance).
double baseline_log_density(const AnyModel& model, std::span<const double> x,
                            std::span<const double> y);

}  // namespace ebreg

#endif  // EBREG_MODELS_HPP
