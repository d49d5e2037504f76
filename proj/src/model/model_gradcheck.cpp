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

#include "silrel/model/model_gradcheck.hpp"

#include <memory>
#include <stdexcept>

#include "silrel/random.hpp"
#include "silrel/scenes/scene.hpp"

namespace silrel::model {

namespace {

using ad::GradCheckCase;
using ad::ScalarFn;

constexpr std::size_t kBatch = 2;

// Parameters of `variant` restricted to names starting with one of `prefixes`.
struct ParamSlice {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;
};

ParamSlice random_params(const ModelConfig& config, Variant variant,
                         const std::vector<std::string>& prefixes, std::mt19937_64& rng) {
    ParamSlice slice;
    for (auto& [name, t] : init_params(config, variant, rng())) {
        bool keep = false;
        for (const auto& p : prefixes) keep = keep || name.rfind(p, 0) == 0;
        if (!keep) continue;
        if (name.ends_with(".bias")) {
            for (double& v : t.mutable_values()) v = 0.2 * uniform01(rng) - 0.1;
        }
        slice.names.push_back(name);
        slice.tensors.push_back(t);
    }
    return slice;
}

ModelParams rebuild(const std::vector<std::string>& names, const std::vector<Tensor>& in,
                    std::size_t offset) {
    ModelParams p;
    for (std::size_t i = 0; i < names.size(); ++i) p.emplace(names[i], in.at(offset + i));
    return p;
}

Tensor category_vectors(const ModelConfig& config, std::mt19937_64& rng) {
    std::vector<double> values;
    for (std::size_t b = 0; b < kBatch; ++b) {
        const auto s = uniform_index(rng, config.num_categories);
        const auto o = uniform_index(rng, config.num_categories);
        const auto d = scenes::category_difference_vector(s, o, config.num_categories);
        values.insert(values.end(), d.begin(), d.end());
    }
    return Tensor({kBatch, config.num_categories}, std::move(values));
}

// Random linear functional of a tensor output, weights fixed per point.
Tensor project(Tape& tape, const Tensor& out, std::uint64_t weight_seed) {
    std::mt19937_64 rng(weight_seed);
    std::vector<double> w(out.size());
    for (double& v : w) v = 2.0 * uniform01(rng) - 1.0;
    return ad::weighted_sum(tape, out, w);
}

// Draws points from `draw` until the recorded forward pass keeps the kink
// margin; deterministic per seed.
using Draw = std::function<std::pair<ScalarFn, std::vector<Tensor>>(std::mt19937_64&)>;

GradCheckCase smooth_case(std::string name, Draw draw) {
    GradCheckCase c;
    c.name = std::move(name);
    c.make = [draw](std::uint64_t seed) {
        for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
            std::mt19937_64 rng(mix_seed(seed, attempt));
            auto point = draw(rng);
            Tape probe(false);
            point.first(probe, point.second);
            if (ad::kink_margin(probe) >= kGradcheckKinkMargin) return point;
        }
        throw std::runtime_error("no smooth gradient-check point found");
    };
    return c;
}

}  // namespace

ModelConfig gradcheck_config() {
    ModelConfig c;
    c.input_size = 8;
    c.vin_channels = {4, 8};
    c.oln_hidden = 6;
    c.semantic_width = 4;
    c.channel_reduction = 4;
    c.classifier_hidden = {10, 6};
    c.num_predicates = 6;
    c.num_categories = 5;
    return c;
}

std::vector<GradCheckCase> model_gradcheck_cases() {
    const ModelConfig config = gradcheck_config();
    const std::size_t s = config.input_size;
    const std::size_t f = config.feature_size();
    const std::size_t ci = config.visual_channels();
    std::vector<GradCheckCase> cases;

    cases.push_back(smooth_case("vin_forward", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kFull, {"vin."}, rng);
        std::vector<Tensor> in{ad::random_tensor({kBatch, s, s, 5}, rng, 0.0, 1.0)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            return ad::mean(t, vin_forward(t, x[0], rebuild(slice.names, x, 1), config));
        };
        return std::make_pair(fn, in);
    }));

    cases.push_back(smooth_case("oln_forward", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kFull, {"oln."}, rng);
        std::vector<Tensor> in{category_vectors(config, rng)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        const auto w = rng();
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            return project(t, oln_forward(t, x[0], rebuild(slice.names, x, 1), config), w);
        };
        return std::make_pair(fn, in);
    }));

    cases.push_back(smooth_case("channel_weight", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kFull, {"sil.cw."}, rng);
        std::vector<Tensor> in{ad::random_tensor({kBatch, f, f, 2 * ci}, rng, -1.0, 1.0)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        const auto w = rng();
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            return project(t, channel_weight(t, x[0], rebuild(slice.names, x, 1)), w);
        };
        return std::make_pair(fn, in);
    }));

    cases.push_back(smooth_case("sil_forward", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kFull, {"sil.cw."}, rng);
        std::vector<Tensor> in{ad::random_tensor({kBatch, f, f, ci}, rng, 0.0, 1.0),
                               ad::random_tensor({kBatch, config.semantic_width}, rng, -1.0, 1.0)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        const auto w = rng();
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            const auto feats = sil_forward(t, x[0], x[1], rebuild(slice.names, x, 2), config);
            return project(t, feats.recalibrated, w);
        };
        return std::make_pair(fn, in);
    }));

    cases.push_back(smooth_case("classifier_forward", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kFull, {"cls."}, rng);
        std::vector<Tensor> in{ad::random_tensor({kBatch, f, f, 2 * ci}, rng, 0.0, 1.0)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        const auto w = rng();
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            return project(t, classifier_forward(t, x[0], rebuild(slice.names, x, 1), config,
                                                 Mode::kEval, 0),
                           w);
        };
        return std::make_pair(fn, in);
    }));

    cases.push_back(smooth_case("cf_forward", [=](std::mt19937_64& rng) {
        auto slice = random_params(config, Variant::kControlled, {"cls."}, rng);
        std::vector<Tensor> in{ad::random_tensor({kBatch, f, f, ci}, rng, 0.0, 1.0)};
        in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
        const auto w = rng();
        ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
            return project(
                t, cf_forward(t, x[0], rebuild(slice.names, x, 1), config, Mode::kEval, 0), w);
        };
        return std::make_pair(fn, in);
    }));

    for (Variant variant : {Variant::kFull, Variant::kControlled}) {
        const std::string name =
            variant == Variant::kFull ? "full_model_loss" : "controlled_model_loss";
        cases.push_back(smooth_case(name, [=](std::mt19937_64& rng) {
            auto slice = random_params(config, variant, {""}, rng);
            std::vector<Tensor> in{ad::random_tensor({kBatch, s, s, 5}, rng, 0.0, 1.0)};
            in.insert(in.end(), slice.tensors.begin(), slice.tensors.end());
            const Tensor diffs = category_vectors(config, rng);
            std::vector<std::size_t> labels;
            for (std::size_t b = 0; b < kBatch; ++b) {
                labels.push_back(uniform_index(rng, config.num_predicates));
            }
            ScalarFn fn = [=](Tape& t, const std::vector<Tensor>& x) {
                const RelationModel model(config, variant, rebuild(slice.names, x, 1));
                Tensor logits = model.forward(t, x[0], diffs, Mode::kEval);
                return ad::softmax_cross_entropy(t, logits, labels);
            };
            return std::make_pair(fn, in);
        }));
    }
    return cases;
}

}  // namespace silrel::model
