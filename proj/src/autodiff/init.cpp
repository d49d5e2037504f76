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

#include "silrel/autodiff/init.hpp"

#include <cmath>
#include <stdexcept>

namespace silrel::ad {

Tensor xavier_init(Shape shape, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
    if (fan_in == 0 || fan_out == 0) {
        throw std::invalid_argument("xavier_init: fan_in and fan_out must be positive");
    }
    const std::size_t n = shape_size(shape);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::mt19937_64 rng(seed);
    std::vector<double> values(n);
    for (double& v : values) v = bound * (2.0 * uniform01(rng) - 1.0);
    return Tensor(std::move(shape), std::move(values), true);
}

}  // namespace silrel::ad
