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

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace silrel::ad {

using Shape = std::vector<std::size_t>;

/// Cache-line aligned allocator. Vectorised reductions peel a prefix that
/// depends on the start address; fixing the alignment keeps results
/// bit-identical from run to run.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Storage of tensor values and gradients.
using Buffer = std::vector<double, AlignedAllocator<double>>;

/// Number of elements described by a shape. Throws on zero extents.
std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

inline constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

namespace detail {
struct TensorData {
    Shape shape;
    Buffer values;
    Buffer grad;  // empty until first accumulation
    bool requires_grad = false;
    std::size_t node_id = kNoNode;
};
}  // namespace detail

/// Row-major float64 array with an optional gradient buffer.
///
/// A Tensor is a handle: copies share storage, which is how parameters stay
/// attached to the tape nodes that read them. Use clone() for a deep copy.
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, Buffer values, bool requires_grad = false);
    Tensor(Shape shape, std::span<const double> values, bool requires_grad = false);
    Tensor(Shape shape, const std::vector<double>& values, bool requires_grad = false)
        : Tensor(std::move(shape), std::span<const double>(values), requires_grad) {}
    Tensor(Shape shape, std::initializer_list<double> values, bool requires_grad = false)
        : Tensor(std::move(shape), std::span<const double>(values.begin(), values.size()),
                 requires_grad) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor filled(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(data_); }
    const Shape& shape() const { return data_->shape; }
    std::size_t rank() const { return data_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return data_->shape.at(axis); }
    std::size_t size() const { return data_->values.size(); }

    std::span<const double> values() const { return data_->values; }
    std::span<double> mutable_values() { return data_->values; }
    double operator[](std::size_t i) const { return data_->values[i]; }
    double item() const;

    bool requires_grad() const { return data_->requires_grad; }
    void set_requires_grad(bool on) { data_->requires_grad = on; }

    bool has_grad() const { return !data_->grad.empty(); }
    std::span<const double> grad() const { return data_->grad; }
    /// Gradient buffer, zero-allocated on first access. Handles share storage, so
    /// this is available through const handles captured by backward closures.
    std::span<double> grad_buffer() const;
    void zero_grad() { data_->grad.clear(); }

    std::size_t node_id() const { return data_->node_id; }
    void set_node_id(std::size_t id) { data_->node_id = id; }

    Tensor clone() const;
    bool same_storage(const Tensor& other) const { return data_ == other.data_; }

private:
    std::shared_ptr<detail::TensorData> data_;
};

bool all_finite(std::span<const double> values);

}  // namespace silrel::ad
