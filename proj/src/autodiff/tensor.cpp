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

#include "silrel/autodiff/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace silrel::ad {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) {
        if (extent == 0) {
            throw std::invalid_argument("tensor shape has a zero extent: " + shape_to_string(shape));
        }
        n *= extent;
    }
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "," : "") << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, std::span<const double> values, bool requires_grad)
    : Tensor(std::move(shape), Buffer(values.begin(), values.end()), requires_grad) {}

Tensor::Tensor(Shape shape, Buffer values, bool requires_grad)
    : data_(std::make_shared<detail::TensorData>()) {
    if (shape_size(shape) != values.size()) {
        throw std::invalid_argument("tensor shape " + shape_to_string(shape) + " does not match " +
                                    std::to_string(values.size()) + " values");
    }
    data_->shape = std::move(shape);
    data_->values = std::move(values);
    data_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
    const std::size_t n = shape_size(shape);
    return Tensor(std::move(shape), Buffer(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor({1}, {value}, requires_grad);
}

double Tensor::item() const {
    if (size() != 1) {
        throw std::logic_error("item() on tensor of shape " + shape_to_string(shape()));
    }
    return data_->values[0];
}

std::span<double> Tensor::grad_buffer() const {
    if (data_->grad.empty()) {
        data_->grad.assign(data_->values.size(), 0.0);
    }
    return data_->grad;
}

Tensor Tensor::clone() const {
    Tensor copy(data_->shape, data_->values, data_->requires_grad);
    copy.data_->grad = data_->grad;
    return copy;
}

bool all_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace silrel::ad
