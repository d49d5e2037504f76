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
#include <span>
#include <vector>

#include "silrel/autodiff/tensor.hpp"

namespace silrel::ad {

enum class OptimizerKind { kAdam, kMomentum };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::kAdam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double momentum = 0.9;  // momentum mode only
};

struct OptimizerState {
    std::vector<std::vector<double>> first;   // Adam m, or velocity
    std::vector<std::vector<double>> second;  // Adam v; empty in momentum mode
    std::uint64_t step = 0;
};

/// In-place parameter update from the gradients currently stored on each
/// parameter. A parameter without a gradient buffer is treated as having a
/// zero gradient.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    void step(std::span<Tensor> params);

    const OptimizerConfig& config() const { return config_; }
    const OptimizerState& state() const { return state_; }
    std::uint64_t step_count() const { return state_.step; }

private:
    OptimizerConfig config_;
    OptimizerState state_;
};

}  // namespace silrel::ad
