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

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "silrel/autodiff/gradcheck.hpp"

namespace silrel::ad {

/// A named finite-difference scenario: given a seed, produce the scalar
/// function and the point (inputs) to check it at.
struct GradCheckCase {
    std::string name;
    std::function<std::pair<ScalarFn, std::vector<Tensor>>(std::uint64_t seed)> make;
    GradCheckOptions options{};
};

/// Tensor with entries uniform in [lo, hi).
Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi,
                     bool requires_grad = true);

/// One case per differentiable primitive, each probed through a random linear
/// functional so that every output coordinate contributes.
std::vector<GradCheckCase> op_gradcheck_cases();

/// Fault-injection fixture: a relu whose backward pass doubles the gradient.
/// Any gradient check of it must fail.
GradCheckCase corrupted_gradient_case();

}  // namespace silrel::ad
