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
#include <random>

#include "silrel/autodiff/tensor.hpp"
#include "silrel/random.hpp"

namespace silrel::ad {

using silrel::uniform01;

/// Glorot/Xavier uniform: values in [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_init(Shape shape, std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

}  // namespace silrel::ad
