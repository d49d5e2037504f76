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

#include <functional>
#include <string>
#include <vector>

#include "silrel/autodiff/tensor.hpp"

namespace silrel::ad {

/// Propagates the gradient stored on `out` into the gradients of its parents.
using BackwardFn = std::function<void(Tensor& out)>;

/// Reverse-mode tape. Nodes are appended in construction order, which is a
/// valid topological order, so backward() is a single reverse sweep.
///
/// Single-threaded: one tape per thread of control.
class Tape {
public:
    Tape() = default;
    /// With gradients disabled nothing is kept for backward; for inference.
    explicit Tape(bool grad_enabled) : grad_enabled_(grad_enabled) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Records the result of an operation. The returned tensor requires grad
    /// iff any parent does; otherwise no backward closure is kept.
    Tensor record(const std::string& op, Shape shape, Buffer values,
                  const std::vector<Tensor>& parents, BackwardFn backward);

    /// Seeds d(loss)/d(loss) = 1 and runs every recorded closure once, in
    /// reverse order. Leaf gradients accumulate (call zero_grad between steps).
    void backward(Tensor& loss);

    std::size_t size() const { return nodes_.size(); }
    const std::string& op_name(std::size_t node) const { return nodes_.at(node).op; }
    const std::vector<Tensor>& node_inputs(std::size_t node) const {
        return nodes_.at(node).inputs;
    }
    const Tensor& node_output(std::size_t node) const { return nodes_.at(node).out; }
    /// Number of closures run by the last backward().
    std::size_t visited() const { return visited_; }

private:
    struct Node {
        std::string op;
        std::vector<Tensor> inputs;
        Tensor out;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    std::size_t visited_ = 0;
    bool consumed_ = false;
    bool grad_enabled_ = true;
};

}  // namespace silrel::ad
