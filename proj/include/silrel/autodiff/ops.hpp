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
#include <span>

#include "silrel/autodiff/tape.hpp"
#include "silrel/autodiff/tensor.hpp"

// Differentiable operations. Feature maps are row-major H x W x C; every op
// that takes a feature map or vector also accepts one extra leading batch axis
// (B x H x W x C, B x D) and treats the batch entries independently.
namespace silrel::ad {

enum class Mode { kTrain, kEval };

/// Cross-correlation with kernels laid out k x k x Cin x Cout.
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding);

/// out[j] = sum_i in[i] * weights[i, j] + bias[j]
Tensor fully_connected(Tape& tape, const Tensor& input, const Tensor& weights,
                       const Tensor& bias);

Tensor relu(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);

/// Scales every channel of `x` by the matching entry of `gate`. `gate` is a
/// length-C vector, or B x C when `x` is batched.
Tensor multiply_channels(Tape& tape, const Tensor& x, const Tensor& gate);

/// 2x2 / stride-2 max pooling. Ties route the gradient to the first maximum in
/// row-major window order.
Tensor maxpool2(Tape& tape, const Tensor& x);

Tensor global_avg_pool(Tape& tape, const Tensor& x);

/// Channel concatenation; `a` takes channels [0, C1). An undefined `b` is the
/// empty tensor and returns `a` unchanged.
Tensor concat_channels(Tape& tape, const Tensor& a, const Tensor& b);

/// Repeats the last axis `n` times: out[..., i] = x[..., i mod C].
Tensor tile_channels(Tape& tape, const Tensor& x, std::size_t n);

/// Inverted dropout. Eval mode (and rate 0) is the identity.
Tensor dropout(Tape& tape, const Tensor& x, double rate, Mode mode, std::uint64_t seed);

/// Same values, new shape (element count must agree).
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// Mean over batch of -log softmax(logits)[label]. `logits` is P or B x P.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const std::size_t> labels);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
/// sum_i x[i] * weights[i] with constant weights; a scalar probe for gradient
/// checks of non-scalar ops.
Tensor weighted_sum(Tape& tape, const Tensor& x, std::span<const double> weights);

/// Numerically stable softmax of a plain vector (no tape).
std::vector<double> softmax(std::span<const double> logits);

}  // namespace silrel::ad
