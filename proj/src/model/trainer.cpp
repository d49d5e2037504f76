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

#include "silrel/model/trainer.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

#include "silrel/model/pairs.hpp"
#include "silrel/random.hpp"

namespace silrel::model {

std::vector<TrainingPair> collect_training_pairs(
    const std::vector<scenes::SceneAnnotation>& data) {
    std::vector<TrainingPair> pairs;
    for (std::size_t s = 0; s < data.size(); ++s) {
        for (const auto& r : data[s].relations) pairs.push_back({s, r});
    }
    return pairs;
}

Batch make_batch(const std::vector<scenes::SceneAnnotation>& data,
                 std::span<const TrainingPair> pairs, const ModelConfig& config) {
    if (pairs.empty()) throw std::invalid_argument("make_batch: empty batch");
    std::vector<Tensor> inputs;
    std::vector<Tensor> diffs;
    Batch batch;
    for (const auto& p : pairs) {
        const auto& scene = data.at(p.scene);
        const auto& s = scene.objects.at(p.relation.subject);
        const auto& o = scene.objects.at(p.relation.object);
        if (p.relation.predicate >= config.num_predicates) {
            throw std::invalid_argument("make_batch: predicate index out of range");
        }
        inputs.push_back(build_pair_input(scene.pixels, s.box, o.box, config.input_size));
        diffs.emplace_back(ad::Shape{config.num_categories},
                           scenes::category_difference_vector(s.category, o.category,
                                                              config.num_categories));
        batch.labels.push_back(p.relation.predicate);
    }
    batch.inputs = stack(inputs);
    batch.diffs = stack(diffs);
    return batch;
}

double batch_loss(const RelationModel& model, const Batch& batch, Mode mode,
                  std::uint64_t dropout_seed) {
    Tape tape(false);
    Tensor logits = model.forward(tape, batch.inputs, batch.diffs, mode, dropout_seed);
    return ad::softmax_cross_entropy(tape, logits, batch.labels).item();
}

double train_step(RelationModel& model, ad::Optimizer& optimizer, const Batch& batch,
                  std::uint64_t dropout_seed) {
    auto params = model.parameter_list();
    for (auto& p : params) p.zero_grad();
    Tape tape;
    Tensor logits = model.forward(tape, batch.inputs, batch.diffs, Mode::kTrain, dropout_seed);
    Tensor loss = ad::softmax_cross_entropy(tape, logits, batch.labels);
    tape.backward(loss);
    optimizer.step(params);
    return loss.item();
}

std::vector<EpochStats> train(RelationModel& model,
                              const std::vector<scenes::SceneAnnotation>& data,
                              const TrainConfig& config, const EpochCallback& on_epoch,
                              const StepCallback& on_step) {
    if (config.batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    const auto pairs = collect_training_pairs(data);
    if (pairs.empty()) throw std::invalid_argument("training data has no relations");

    ad::Optimizer optimizer(config.optimizer);
    std::vector<std::size_t> order(pairs.size());
    std::vector<TrainingPair> batch_pairs;
    std::vector<EpochStats> history;
    std::uint64_t step = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(mix_seed(config.seed, epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[uniform_index(rng, i)]);
        }
        EpochStats stats;
        stats.epoch = epoch;
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            batch_pairs.clear();
            for (std::size_t i = begin; i < end; ++i) batch_pairs.push_back(pairs[order[i]]);
            const Batch batch = make_batch(data, batch_pairs, model.config());
            const double loss = train_step(model, optimizer, batch, mix_seed(~config.seed, step));
            if (on_step) on_step(epoch, step, loss);
            ++step;
            loss_sum += loss * static_cast<double>(end - begin);
            stats.samples += end - begin;
            ++stats.steps;
        }
        stats.mean_loss = loss_sum / static_cast<double>(stats.samples);
        history.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return history;
}

}  // namespace silrel::model
