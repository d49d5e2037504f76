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

#include "silrel/autodiff/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace silrel::ad {

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (!(config_.learning_rate >= 0.0)) {
        throw std::invalid_argument("optimizer: learning rate must be non-negative");
    }
}

void Optimizer::step(std::span<Tensor> params) {
    const bool adam = config_.kind == OptimizerKind::kAdam;
    if (state_.first.empty()) {
        for (const Tensor& p : params) {
            state_.first.emplace_back(p.size(), 0.0);
            if (adam) state_.second.emplace_back(p.size(), 0.0);
        }
    }
    if (state_.first.size() != params.size()) {
        throw std::invalid_argument("optimizer: parameter list changed between steps");
    }
    ++state_.step;
    const double lr = config_.learning_rate;
    const double t = static_cast<double>(state_.step);
    const double bias1 = 1.0 - std::pow(config_.beta1, t);
    const double bias2 = 1.0 - std::pow(config_.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = params[k];
        auto& m = state_.first[k];
        if (m.size() != p.size()) {
            throw std::invalid_argument("optimizer: parameter shape changed between steps");
        }
        auto w = p.mutable_values();
        const std::vector<double> no_grad = p.has_grad() ? std::vector<double>{}
                                                         : std::vector<double>(p.size(), 0.0);
        const std::span<const double> g = p.has_grad() ? p.grad() : std::span(no_grad);
        if (adam) {
            auto& v = state_.second[k];
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
                v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
                const double m_hat = m[i] / bias1;
                const double v_hat = v[i] / bias2;
                w[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
            }
        } else {
            for (std::size_t i = 0; i < w.size(); ++i) {
                m[i] = config_.momentum * m[i] + g[i];
                w[i] -= lr * m[i];
            }
        }
    }
}

}  // namespace silrel::ad
