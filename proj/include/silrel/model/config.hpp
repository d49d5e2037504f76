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
#include <string>
#include <vector>

namespace silrel::model {

enum class Variant {
    kFull,        // VIN -> SIL (OLN kernels, dynamic conv, concat, channel weight) -> classifier
    kControlled,  // VIN -> classifier; the SIL-ablated framework
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Architecture hyperparameters. Defaults are the desk-scale plan; see
/// full_scale_config() for the full-size widths.
struct ModelConfig {
    std::size_t input_size = 64;                         // S
    std::vector<std::size_t> vin_channels{16, 32, 64};   // last entry is c_i
    std::size_t oln_hidden = 64;
    std::size_t semantic_width = 32;                     // C_s, width of F_s
    std::size_t channel_reduction = 4;                   // r of the channel-weight block
    std::vector<std::size_t> classifier_hidden{256, 128};
    double dropout = 0.5;
    std::size_t num_predicates = 6;                      // P
    std::size_t num_categories = 8;                      // N

    std::size_t visual_channels() const { return vin_channels.back(); }
    /// n = c_i / C_s
    std::size_t extension_count() const { return visual_channels() / semantic_width; }
    /// Side of F_v: one halving per VIN block.
    std::size_t feature_size() const { return input_size >> vin_channels.size(); }

    /// Throws std::invalid_argument on non-positive widths, C_s not dividing
    /// c_i, or an input size that does not survive the pooling stages.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// S = 224, VIN 5 -> 128 -> 256 -> 512, OLN 300 -> 256 (n = 2).
ModelConfig full_scale_config();

}  // namespace silrel::model
