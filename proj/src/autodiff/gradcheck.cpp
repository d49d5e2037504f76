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

#include "silrel/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "silrel/autodiff/init.hpp"

namespace silrel::ad {
namespace {

double evaluate(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
    Tape tape;
    return fn(tape, inputs).item();
}

std::vector<std::size_t> pick_coordinates(std::size_t size, std::size_t limit,
                                          std::mt19937_64& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    if (limit == 0 || limit >= size) return idx;
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < limit; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * (size - i));
        std::swap(idx[i], idx[std::min(j, size - 1)]);
    }
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

GradCheckResult finite_difference_check(const ScalarFn& fn, std::vector<Tensor> inputs,
                                        const GradCheckOptions& options) {
    if (!(options.eps > 0.0)) throw std::invalid_argument("gradcheck: eps must be positive");

    for (Tensor& t : inputs) t.zero_grad();
    std::vector<std::vector<double>> analytic(inputs.size());
    {
        Tape tape;
        Tensor out = fn(tape, inputs);
        if (out.size() != 1) throw std::invalid_argument("gradcheck: function must be scalar");
        if (out.requires_grad()) tape.backward(out);
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            if (!inputs[k].requires_grad()) continue;
            const auto g = inputs[k].grad();
            analytic[k] = g.empty() ? std::vector<double>(inputs[k].size(), 0.0)
                                    : std::vector<double>(g.begin(), g.end());
            inputs[k].zero_grad();
        }
    }

    GradCheckResult result;
    std::mt19937_64 rng(options.sample_seed);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (!inputs[k].requires_grad()) continue;
        auto values = inputs[k].mutable_values();
        for (std::size_t i : pick_coordinates(values.size(), options.max_coords_per_tensor, rng)) {
            const double saved = values[i];
            values[i] = saved + options.eps;
            const double up = evaluate(fn, inputs);
            values[i] = saved - options.eps;
            const double down = evaluate(fn, inputs);
            values[i] = saved;

            const double numeric = (up - down) / (2.0 * options.eps);
            const double a = analytic[k][i];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            const double err = std::abs(a - numeric) / denom;
            ++result.coordinates;
            if (err > result.max_rel_error || !std::isfinite(err)) {
                result.max_rel_error = std::isfinite(err) ? err : INFINITY;
                result.worst_input = k;
                result.worst_index = i;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

double kink_margin(const Tape& tape) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < tape.size(); ++n) {
        const std::string& op = tape.op_name(n);
        if (op == "relu") {
            for (double v : tape.node_inputs(n).front().values()) {
                margin = std::min(margin, std::abs(v));
            }
        } else if (op == "maxpool2") {
            const Tensor& x = tape.node_inputs(n).front();
            const std::size_t r = x.rank();
            const std::size_t h = x.dim(r - 3);
            const std::size_t w = x.dim(r - 2);
            const std::size_t c = x.dim(r - 1);
            const std::size_t batch = x.size() / (h * w * c);
            const auto v = x.values();
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t y = 0; y + 1 < h; y += 2) {
                    for (std::size_t xx = 0; xx + 1 < w; xx += 2) {
                        for (std::size_t ch = 0; ch < c; ++ch) {
                            double window[4];
                            for (std::size_t k = 0; k < 4; ++k) {
                                window[k] = v[((b * h + y + k / 2) * w + xx + k % 2) * c + ch];
                            }
                            std::sort(window, window + 4);
                            if (window[3] == 0.0) continue;
                            margin = std::min(margin, window[3] - window[2]);
                        }
                    }
                }
            }
        }
    }
    return margin;
}

}  // namespace silrel::ad
