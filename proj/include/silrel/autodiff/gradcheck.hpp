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
#include <string>
#include <vector>

#include "silrel/autodiff/tape.hpp"

namespace silrel::ad {

/// Builds a scalar on `tape` from `inputs`. Must be deterministic.
using ScalarFn = std::function<Tensor(Tape& tape, const std::vector<Tensor>& inputs)>;

struct GradCheckOptions {
    double eps = 1e-5;
    /// Coordinates checked per input tensor; 0 checks every coordinate.
    std::size_t max_coords_per_tensor = 0;
    std::uint64_t sample_seed = 0;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    std::size_t worst_input = 0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Compares backward() gradients with central differences
/// (f(x + eps) - f(x - eps)) / (2 eps) for every input that requires grad.
/// Relative error per coordinate is |a - n| / max(1, |a|, |n|).
///
/// `inputs` are perturbed in place and restored before returning.
GradCheckResult finite_difference_check(const ScalarFn& fn, std::vector<Tensor> inputs,
                                        const GradCheckOptions& options = {});

/// Distance of the recorded point from the nearest non-differentiable point
/// of a piecewise-linear op: the smallest |x| fed to a relu, and the smallest
/// gap between the two largest entries of a maxpool window (windows whose
/// maximum is exactly zero are skipped, since those only arise behind a
/// relu that already reports its own margin). Infinity if neither op ran.
double kink_margin(const Tape& tape);

}  // namespace silrel::ad
