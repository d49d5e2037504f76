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
#include <vector>

#include "silrel/autodiff/checkpoint.hpp"
#include "silrel/autodiff/ops.hpp"
#include "silrel/model/config.hpp"

namespace silrel::model {

using ad::Mode;
using ad::Tape;
using ad::Tensor;
using ModelParams = ad::NamedTensors;

/// Xavier-uniform weights and zero biases. Parameter names:
///   vin.conv{1..L}.{kernels,bias}
///   oln.fc{1,2}.{weights,bias}                 (full model only)
///   sil.cw.fc{1,2}.{weights,bias}              (full model only)
///   cls.fc{1,2,3}.{weights,bias}
ModelParams init_params(const ModelConfig& config, Variant variant, std::uint64_t seed);

/// Checks that `params` holds exactly the tensors init_params would create,
/// with matching shapes.
void check_params(const ModelParams& params, const ModelConfig& config, Variant variant);

std::size_t parameter_count(const ModelParams& params);

/// Intermediate maps of one SIL pass. Batched shapes: F_v is B x h x w x c_i,
/// F_s is B x C_s, F_sk is B x c_i, F_ac B x h x w x c_i, F_u and F_sil
/// B x h x w x 2c_i.
struct PairFeatures {
    Tensor visual;        // F_v
    Tensor semantic;      // F_s
    Tensor kernels;       // F_sk
    Tensor attended;      // F_ac
    Tensor concatenated;  // F_u
    Tensor recalibrated;  // F_SIL
};

/// Visual inference network: per block conv3x3 (stride 1, pad 1) -> relu ->
/// maxpool2. Input S x S x 5 or B x S x S x 5.
Tensor vin_forward(Tape& tape, const Tensor& input, const ModelParams& params,
                   const ModelConfig& config);

/// One-shot learner: FC(N -> hidden) -> relu -> FC(hidden -> C_s). The output
/// is the bank of C_s dynamic 1x1 kernels.
Tensor oln_forward(Tape& tape, const Tensor& diff, const ModelParams& params,
                   const ModelConfig& config);

/// F_sk = E(F_s, n): tiles the C_s kernels n times to cover c_i channels.
Tensor extend(Tape& tape, const Tensor& semantic, std::size_t n);

/// Depthwise 1x1 dynamic convolution: F_ac[h, w, i] = F_sk[i] * F_v[h, w, i].
Tensor dynamic_conv(Tape& tape, const Tensor& kernels, const Tensor& visual);

/// Squeeze (global average) -> FC(2c_i -> 2c_i / r) -> relu -> FC -> sigmoid,
/// then per-channel scaling of F_u.
Tensor channel_weight(Tape& tape, const Tensor& concatenated, const ModelParams& params);

/// extend -> dynamic_conv -> concat(F_ac, F_v) -> channel_weight.
PairFeatures sil_forward(Tape& tape, const Tensor& visual, const Tensor& semantic,
                         const ModelParams& params, const ModelConfig& config);

/// flatten -> FC -> relu -> dropout -> FC -> relu -> dropout -> FC(P).
/// `dropout_seed` feeds the two dropout masks in train mode.
Tensor classifier_forward(Tape& tape, const Tensor& features, const ModelParams& params,
                          const ModelConfig& config, Mode mode, std::uint64_t dropout_seed);

/// Controlled framework: classifier straight on flattened F_v.
Tensor cf_forward(Tape& tape, const Tensor& visual, const ModelParams& params,
                  const ModelConfig& config, Mode mode, std::uint64_t dropout_seed);

/// Predicate network with its parameters.
class RelationModel {
public:
    RelationModel(ModelConfig config, Variant variant, std::uint64_t seed);
    RelationModel(ModelConfig config, Variant variant, ModelParams params);

    const ModelConfig& config() const { return config_; }
    Variant variant() const { return variant_; }
    const ModelParams& params() const { return params_; }
    ModelParams& params() { return params_; }
    /// Parameter handles in name order (the order the optimizer sees).
    std::vector<Tensor> parameter_list() const;

    /// B x P logits for B five-channel inputs and B category-difference
    /// vectors. `diffs` is ignored by the controlled variant.
    Tensor forward(Tape& tape, const Tensor& inputs, const Tensor& diffs, Mode mode,
                   std::uint64_t dropout_seed = 0) const;

    /// Full-model intermediates (throws for the controlled variant).
    PairFeatures features(Tape& tape, const Tensor& inputs, const Tensor& diffs) const;

    /// Checkpoint with a JSON manifest holding the full ModelConfig and variant.
    void save(const std::filesystem::path& path) const;
    /// Rebuilds the model from a checkpoint; refuses missing, extra or
    /// mis-shaped tensors.
    static RelationModel load(const std::filesystem::path& path);

private:
    ModelConfig config_;
    Variant variant_;
    ModelParams params_;
};

/// JSON form of a config, used in checkpoint manifests.
std::string config_to_json(const ModelConfig& config, Variant variant);
std::pair<ModelConfig, Variant> config_from_json(const std::string& text);

}  // namespace silrel::model
