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

#include "silrel/autodiff/gradcheck_suite.hpp"

#include "silrel/autodiff/init.hpp"
#include "silrel/autodiff/ops.hpp"

namespace silrel::ad {
namespace {

using Maker = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

// Wraps a tensor-valued op into a scalar by a fixed random projection whose
// weights are drawn once the output shape is known.
GradCheckCase projected(std::string name, std::vector<Shape> shapes, Maker op,
                        double lo = -1.0, double hi = 1.0) {
    GradCheckCase c;
    c.name = name;
    c.make = [shapes, op, lo, hi](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<Tensor> inputs;
        for (const Shape& s : shapes) inputs.push_back(random_tensor(s, rng, lo, hi));
        auto weights = std::make_shared<std::vector<double>>();
        auto weight_seed = rng();
        ScalarFn fn = [op, weights, weight_seed](Tape& tape, const std::vector<Tensor>& in) {
            Tensor out = op(tape, in);
            if (weights->size() != out.size()) {
                std::mt19937_64 wrng(weight_seed);
                weights->resize(out.size());
                for (double& w : *weights) w = 2.0 * uniform01(wrng) - 1.0;
            }
            return weighted_sum(tape, out, *weights);
        };
        return std::make_pair(fn, inputs);
    };
    return c;
}

}  // namespace

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo, double hi,
                     bool requires_grad) {
    std::vector<double> values(shape_size(shape));
    for (double& v : values) v = lo + (hi - lo) * uniform01(rng);
    return Tensor(std::move(shape), std::move(values), requires_grad);
}

std::vector<GradCheckCase> op_gradcheck_cases() {
    std::vector<GradCheckCase> cases;
    cases.push_back(projected("conv2d", {{2, 6, 5, 3}, {3, 3, 3, 4}, {4}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  return conv2d(t, in[0], in[1], in[2], 2, 1);
                              }));
    cases.push_back(projected("fully_connected", {{3, 5}, {5, 4}, {4}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  return fully_connected(t, in[0], in[1], in[2]);
                              }));
    cases.push_back(projected("relu", {{4, 4, 3}}, [](Tape& t, const std::vector<Tensor>& in) {
        return relu(t, in[0]);
    }));
    cases.push_back(projected("sigmoid", {{4, 4, 3}}, [](Tape& t, const std::vector<Tensor>& in) {
        return sigmoid(t, in[0]);
    }, -4.0, 4.0));
    cases.push_back(projected("multiply_channels", {{2, 3, 3, 4}, {2, 4}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  return multiply_channels(t, in[0], in[1]);
                              }));
    cases.push_back(projected("maxpool2", {{2, 4, 6, 3}}, [](Tape& t, const std::vector<Tensor>& in) {
        return maxpool2(t, in[0]);
    }));
    cases.push_back(projected("global_avg_pool", {{2, 3, 5, 4}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  return global_avg_pool(t, in[0]);
                              }));
    cases.push_back(projected("concat_channels", {{3, 3, 2}, {3, 3, 5}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  return concat_channels(t, in[0], in[1]);
                              }));
    cases.push_back(projected("tile_channels", {{2, 3}}, [](Tape& t, const std::vector<Tensor>& in) {
        return tile_channels(t, in[0], 3);
    }));
    cases.push_back(projected("dropout", {{5, 6}}, [](Tape& t, const std::vector<Tensor>& in) {
        return dropout(t, in[0], 0.5, Mode::kTrain, 1234);
    }));
    cases.push_back(projected("reshape", {{2, 3, 4}}, [](Tape& t, const std::vector<Tensor>& in) {
        return reshape(t, in[0], {4, 6});
    }));
    cases.push_back(projected("softmax_cross_entropy", {{4, 6}},
                              [](Tape& t, const std::vector<Tensor>& in) {
                                  const std::vector<std::size_t> labels{0, 5, 2, 2};
                                  return softmax_cross_entropy(t, in[0], labels);
                              }, -3.0, 3.0));
    cases.push_back(projected("mean", {{3, 4}}, [](Tape& t, const std::vector<Tensor>& in) {
        return mean(t, in[0]);
    }));
    cases.push_back(projected("sum", {{3, 4}}, [](Tape& t, const std::vector<Tensor>& in) {
        return sum(t, in[0]);
    }));
    return cases;
}

GradCheckCase corrupted_gradient_case() {
    return projected("corrupted_relu", {{3, 4}}, [](Tape& t, const std::vector<Tensor>& in) {
        Tensor x = in[0];
        Buffer values(x.values().begin(), x.values().end());
        for (double& v : values) v = v > 0.0 ? v : 0.0;
        return t.record("corrupted_relu", x.shape(), std::move(values), {x}, [x](Tensor& out) mutable {
            auto gx = x.grad_buffer();
            const auto g = out.grad();
            const auto xv = x.values();
            for (std::size_t i = 0; i < gx.size(); ++i) {
                if (xv[i] > 0.0) gx[i] += 2.0 * g[i];
            }
        });
    });
}

}  // namespace silrel::ad
