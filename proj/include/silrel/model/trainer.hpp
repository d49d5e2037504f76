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
#include <functional>
#include <span>
#include <vector>

#include "silrel/autodiff/optimizer.hpp"
#include "silrel/model/sil_model.hpp"
#include "silrel/scenes/scene.hpp"

namespace silrel::model {

/// One annotated relation used as a training sample.
struct TrainingPair {
    std::size_t scene = 0;
    scenes::RelationTriplet relation;
};

/// Every ground-truth relation of every scene, in scene then annotation order.
std::vector<TrainingPair> collect_training_pairs(const std::vector<scenes::SceneAnnotation>& data);

/// Inputs, category vectors and labels for a batch of pairs.
struct Batch {
    Tensor inputs;  // B x S x S x 5
    Tensor diffs;   // B x N
    std::vector<std::size_t> labels;
};

Batch make_batch(const std::vector<scenes::SceneAnnotation>& data,
                 std::span<const TrainingPair> pairs, const ModelConfig& config);

/// Mean cross-entropy of a batch, without updating anything.
double batch_loss(const RelationModel& model, const Batch& batch, Mode mode,
                  std::uint64_t dropout_seed = 0);

/// Train-mode forward, mean cross-entropy, backward and one optimizer step.
/// Returns the loss before the update.
double train_step(RelationModel& model, ad::Optimizer& optimizer, const Batch& batch,
                  std::uint64_t dropout_seed);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    ad::OptimizerConfig optimizer;
    std::uint64_t seed = 0;  // shuffling and dropout
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    std::size_t steps = 0;
    std::size_t samples = 0;
    double mean_loss = 0.0;  // sample-weighted over the epoch
};

using EpochCallback = std::function<void(const EpochStats&)>;
/// Called after every optimizer step with the 1-based epoch, the 0-based
/// global step and the batch loss before the update.
using StepCallback = std::function<void(std::size_t epoch, std::uint64_t step, double loss)>;

/// Seeded shuffle per epoch, batches in shuffled order, last batch may be
/// short. Fully determined by (model, data, config).
std::vector<EpochStats> train(RelationModel& model,
                              const std::vector<scenes::SceneAnnotation>& data,
                              const TrainConfig& config, const EpochCallback& on_epoch = {},
                              const StepCallback& on_step = {});

}  // namespace silrel::model
