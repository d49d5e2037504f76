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

#include "silrel/autodiff/tape.hpp"

#include <stdexcept>

namespace silrel::ad {

Tensor Tape::record(const std::string& op, Shape shape, Buffer values,
                    const std::vector<Tensor>& parents, BackwardFn backward) {
    if (consumed_) {
        throw std::logic_error("tape already ran backward; start a new tape");
    }
    bool needs_grad = false;
    for (const Tensor& p : parents) {
        needs_grad = needs_grad || p.requires_grad();
    }
    needs_grad = needs_grad && grad_enabled_;
    Tensor out(std::move(shape), std::move(values), needs_grad);
    out.set_node_id(nodes_.size());
    nodes_.push_back(Node{op, parents, out, needs_grad ? std::move(backward) : BackwardFn{}});
    return out;
}

void Tape::backward(Tensor& loss) {
    if (loss.size() != 1) {
        throw std::invalid_argument("backward() needs a scalar loss, got " +
                                    shape_to_string(loss.shape()));
    }
    if (loss.node_id() == kNoNode || loss.node_id() >= nodes_.size() ||
        !nodes_[loss.node_id()].out.same_storage(loss)) {
        throw std::invalid_argument("loss was not produced on this tape");
    }
    if (consumed_) {
        throw std::logic_error("backward() called twice on one tape");
    }
    consumed_ = true;
    loss.grad_buffer()[0] += 1.0;
    visited_ = 0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& node = nodes_[i];
        ++visited_;
        if (node.backward && node.out.has_grad()) {
            node.backward(node.out);
        }
    }
}

}  // namespace silrel::ad
