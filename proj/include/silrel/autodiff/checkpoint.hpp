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

#include <filesystem>
#include <map>
#include <string>

#include "silrel/autodiff/tensor.hpp"

namespace silrel::ad {

/// Parameters keyed by stable dotted names such as `vin.conv1.kernels`.
using NamedTensors = std::map<std::string, Tensor>;

/// Checkpoint container.
///
/// Layout (all integers little-endian):
///   magic "SILCKPT1"
///   u64 manifest length, manifest bytes (UTF-8, free-form; JSON by convention)
///   u64 tensor count
///   per tensor, in name order:
///     u64 name length, name bytes
///     u64 rank, rank x u64 extents
///     extent-product x f64 (IEEE-754 binary64, little-endian)
struct Checkpoint {
    std::string manifest;
    NamedTensors tensors;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace silrel::ad
