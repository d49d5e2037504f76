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
#include <utility>
#include <vector>

#include "silrel/geometry/geometry.hpp"
#include "silrel/model/sil_model.hpp"
#include "silrel/scenes/scene.hpp"

namespace silrel::model {

/// Crop frame for a pair: union of both boxes grown by the context margin,
/// clamped to the image.
geo::BBox pair_frame(const geo::BBox& subject, const geo::BBox& object, geo::Bounds bounds);

/// S x S x 5 input for one ordered pair: resized RGB of the pair frame, then
/// subject and object masks.
Tensor build_pair_input(const geo::Image& image, const geo::BBox& subject,
                        const geo::BBox& object, std::size_t resolution);

/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(const std::vector<Tensor>& items);

struct PairPrediction {
    std::vector<double> distribution;  // softmax over predicates
    std::size_t predicate = 0;         // argmax, first index on ties
    double score = 0.0;                // subject.score * object.score * max probability
};

PairPrediction make_prediction(std::span<const double> logits, double subject_score,
                               double object_score);

/// Eval-mode prediction for one ordered pair of scored boxes.
PairPrediction predict_pair(const RelationModel& model, const geo::Image& image,
                            const geo::ScoredBox& subject, const geo::ScoredBox& object);

/// Same as calling predict_pair per entry of `pairs`, evaluated in batches.
std::vector<PairPrediction> predict_pairs(
    const RelationModel& model, const geo::Image& image, const std::vector<geo::ScoredBox>& boxes,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t batch_size = 32);

}  // namespace silrel::model
