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

#include "silrel/model/pairs.hpp"

#include <algorithm>
#include <stdexcept>

namespace silrel::model {

geo::BBox pair_frame(const geo::BBox& subject, const geo::BBox& object, geo::Bounds bounds) {
    return geo::union_box(subject, object, geo::context_margin(subject, object), bounds);
}

Tensor build_pair_input(const geo::Image& image, const geo::BBox& subject,
                        const geo::BBox& object, std::size_t resolution) {
    const geo::BBox frame = pair_frame(subject, object, image.bounds());
    const auto patch = geo::crop_resize(image, frame, resolution);
    const auto masks = geo::rasterize_dual_masks(frame, subject, object, resolution);
    return geo::five_channel_input(patch, masks);
}

Tensor stack(const std::vector<Tensor>& items) {
    if (items.empty()) throw std::invalid_argument("stack: no tensors");
    ad::Shape shape = items.front().shape();
    std::vector<double> values;
    values.reserve(items.size() * items.front().size());
    for (const auto& t : items) {
        if (t.shape() != shape) {
            throw std::invalid_argument("stack: shape " + ad::shape_to_string(t.shape()) +
                                        " differs from " + ad::shape_to_string(shape));
        }
        values.insert(values.end(), t.values().begin(), t.values().end());
    }
    shape.insert(shape.begin(), items.size());
    return Tensor(std::move(shape), std::move(values));
}

PairPrediction make_prediction(std::span<const double> logits, double subject_score,
                               double object_score) {
    PairPrediction p;
    p.distribution = ad::softmax(logits);
    const auto best = std::max_element(p.distribution.begin(), p.distribution.end());
    p.predicate = static_cast<std::size_t>(best - p.distribution.begin());
    p.score = subject_score * object_score * *best;
    return p;
}

PairPrediction predict_pair(const RelationModel& model, const geo::Image& image,
                            const geo::ScoredBox& subject, const geo::ScoredBox& object) {
    return predict_pairs(model, image, {subject, object}, {{0, 1}}, 1).front();
}

std::vector<PairPrediction> predict_pairs(
    const RelationModel& model, const geo::Image& image, const std::vector<geo::ScoredBox>& boxes,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("predict_pairs: batch_size must be positive");
    const auto& config = model.config();
    std::vector<PairPrediction> out;
    out.reserve(pairs.size());
    for (std::size_t begin = 0; begin < pairs.size(); begin += batch_size) {
        const std::size_t end = std::min(pairs.size(), begin + batch_size);
        std::vector<Tensor> inputs;
        std::vector<Tensor> diffs;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& s = boxes.at(pairs[i].first);
            const auto& o = boxes.at(pairs[i].second);
            inputs.push_back(build_pair_input(image, s.box, o.box, config.input_size));
            diffs.emplace_back(ad::Shape{config.num_categories},
                               scenes::category_difference_vector(s.category, o.category,
                                                                  config.num_categories));
        }
        Tape tape(false);
        Tensor logits = model.forward(tape, stack(inputs), stack(diffs), Mode::kEval);
        const std::size_t p = config.num_predicates;
        for (std::size_t i = begin; i < end; ++i) {
            out.push_back(make_prediction(logits.values().subspan((i - begin) * p, p),
                                          boxes[pairs[i].first].score,
                                          boxes[pairs[i].second].score));
        }
    }
    return out;
}

}  // namespace silrel::model
