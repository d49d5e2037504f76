/**
 * Copyright 2026 The silrel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <vector>

#include "silrel/autodiff/gradcheck_suite.hpp"
#include "silrel/model/sil_model.hpp"

namespace silrel::model {

/// Small but structurally complete config for finite-difference checks:
/// S = 8, VIN 5 -> 4 -> 8, C_s = 4 (n = 2), classifier 10 -> 6.
ModelConfig gradcheck_config();

/// Smallest relu / maxpool kink distance a check point must keep. Points
/// closer than this are redrawn, so a +-eps step cannot cross a kink.
inline constexpr double kGradcheckKinkMargin = 2e-4;

/// Finite-difference scenarios for the network blocks and the composed
/// eval-mode loss of both variants, with respect to every parameter tensor
/// and the input image.
std::vector<ad::GradCheckCase> model_gradcheck_cases();

}  // namespace silrel::model
