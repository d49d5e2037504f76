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

#include "silrel/autodiff/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "silrel/random.hpp"

namespace silrel::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

[[noreturn]] void fail(const std::string& op, const std::string& what) {
    throw std::invalid_argument(op + ": " + what);
}

struct MapDims {
    std::size_t batch = 1;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    bool batched = false;
};

MapDims feature_map_dims(const std::string& op, const Tensor& x) {
    if (x.rank() == 3) return {1, x.dim(0), x.dim(1), x.dim(2), false};
    if (x.rank() == 4) return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), true};
    fail(op, "expected H x W x C or B x H x W x C, got " + shape_to_string(x.shape()));
}

Shape map_shape(const MapDims& d, std::size_t h, std::size_t w, std::size_t c) {
    if (d.batched) return {d.batch, h, w, c};
    return {h, w, c};
}

// Rows x columns view of a vector or batch of vectors.
std::pair<std::size_t, std::size_t> vector_dims(const std::string& op, const Tensor& x) {
    if (x.rank() == 1) return {1, x.dim(0)};
    if (x.rank() == 2) return {x.dim(0), x.dim(1)};
    fail(op, "expected a vector or B x D batch, got " + shape_to_string(x.shape()));
}

// Column sums in a fixed row order.
template <class Out>
void sum_rows(const ConstMatMap& g, Out& out) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
        for (Eigen::Index c = 0; c < g.cols(); ++c) out[c] += g(r, c);
    }
}

void accumulate(const Tensor& target, std::span<const double> delta) {
    auto g = target.grad_buffer();
    for (std::size_t i = 0; i < delta.size(); ++i) g[i] += delta[i];
}

}  // namespace

Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels, const Tensor& bias,
              std::size_t stride, std::size_t padding) {
    const std::string op = "conv2d";
    const MapDims d = feature_map_dims(op, input);
    if (kernels.rank() != 4 || kernels.dim(0) != kernels.dim(1)) {
        fail(op, "kernels must be k x k x Cin x Cout, got " + shape_to_string(kernels.shape()));
    }
    const std::size_t k = kernels.dim(0);
    const std::size_t cin = kernels.dim(2);
    const std::size_t cout = kernels.dim(3);
    if (cin != d.channels) {
        fail(op, "input has " + std::to_string(d.channels) + " channels but kernels expect " +
                     std::to_string(cin));
    }
    if (bias.rank() != 1 || bias.dim(0) != cout) fail(op, "bias must have Cout entries");
    if (stride == 0) fail(op, "stride must be positive");
    if (k > d.height + 2 * padding || k > d.width + 2 * padding) {
        fail(op, "kernel larger than padded input");
    }
    const std::size_t ho = (d.height + 2 * padding - k) / stride + 1;
    const std::size_t wo = (d.width + 2 * padding - k) / stride + 1;
    const std::size_t rows = d.batch * ho * wo;
    const std::size_t patch = k * k * cin;

    // im2col: one row per output pixel, columns ordered (ky, kx, ci) to match
    // the kernel layout.
    auto cols = std::make_shared<Buffer>(rows * patch, 0.0);
    const auto in = input.values();
    const long pad = static_cast<long>(padding);
    for (std::size_t b = 0; b < d.batch; ++b) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
                double* row = cols->data() + ((b * ho + oy) * wo + ox) * patch;
                for (std::size_t ky = 0; ky < k; ++ky) {
                    const long iy = static_cast<long>(oy * stride + ky) - pad;
                    if (iy < 0 || iy >= static_cast<long>(d.height)) continue;
                    for (std::size_t kx = 0; kx < k; ++kx) {
                        const long ix = static_cast<long>(ox * stride + kx) - pad;
                        if (ix < 0 || ix >= static_cast<long>(d.width)) continue;
                        const double* src =
                            in.data() + ((b * d.height + iy) * d.width + ix) * cin;
                        std::copy(src, src + cin, row + (ky * k + kx) * cin);
                    }
                }
            }
        }
    }

    Buffer out_values(rows * cout);
    {
        ConstMatMap x(cols->data(), rows, patch);
        ConstMatMap w(kernels.values().data(), patch, cout);
        MatMap y(out_values.data(), rows, cout);
        y.noalias() = x * w;
        const Eigen::Map<const Eigen::RowVectorXd> bv(bias.values().data(), cout);
        y.rowwise() += bv;
    }

    auto backward = [input, kernels, bias, cols, d, k, cin, cout, ho, wo, rows, patch, stride,
                     pad](Tensor& out) mutable {
        ConstMatMap g(out.grad().data(), rows, cout);
        if (kernels.requires_grad()) {
            MatMap gw(kernels.grad_buffer().data(), patch, cout);
            gw.noalias() += ConstMatMap(cols->data(), rows, patch).transpose() * g;
        }
        if (bias.requires_grad()) {
            Eigen::Map<Eigen::RowVectorXd> gb(bias.grad_buffer().data(), cout);
            sum_rows(g, gb);
        }
        if (input.requires_grad()) {
            RowMat gcols = g * ConstMatMap(kernels.values().data(), patch, cout).transpose();
            auto gin = input.grad_buffer();
            for (std::size_t b = 0; b < d.batch; ++b) {
                for (std::size_t oy = 0; oy < ho; ++oy) {
                    for (std::size_t ox = 0; ox < wo; ++ox) {
                        const double* row = gcols.data() + ((b * ho + oy) * wo + ox) * patch;
                        for (std::size_t ky = 0; ky < k; ++ky) {
                            const long iy = static_cast<long>(oy * stride + ky) - pad;
                            if (iy < 0 || iy >= static_cast<long>(d.height)) continue;
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long ix = static_cast<long>(ox * stride + kx) - pad;
                                if (ix < 0 || ix >= static_cast<long>(d.width)) continue;
                                double* dst =
                                    gin.data() + ((b * d.height + iy) * d.width + ix) * cin;
                                const double* src = row + (ky * k + kx) * cin;
                                for (std::size_t c = 0; c < cin; ++c) dst[c] += src[c];
                            }
                        }
                    }
                }
            }
        }
    };
    return tape.record(op, map_shape(d, ho, wo, cout), std::move(out_values),
                       {input, kernels, bias}, std::move(backward));
}

Tensor fully_connected(Tape& tape, const Tensor& input, const Tensor& weights,
                       const Tensor& bias) {
    const std::string op = "fully_connected";
    const auto [rows, in_dim] = vector_dims(op, input);
    if (weights.rank() != 2 || weights.dim(0) != in_dim) {
        fail(op, "weights " + shape_to_string(weights.shape()) + " do not accept input " +
                     shape_to_string(input.shape()));
    }
    const std::size_t out_dim = weights.dim(1);
    if (bias.rank() != 1 || bias.dim(0) != out_dim) {
        fail(op, "bias " + shape_to_string(bias.shape()) + " does not match output width " +
                     std::to_string(out_dim));
    }
    Buffer out_values(rows * out_dim);
    {
        MatMap y(out_values.data(), rows, out_dim);
        y.noalias() = ConstMatMap(input.values().data(), rows, in_dim) *
                      ConstMatMap(weights.values().data(), in_dim, out_dim);
        y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.values().data(), out_dim);
    }
    Shape shape = input.rank() == 1 ? Shape{out_dim} : Shape{rows, out_dim};
    auto backward = [input, weights, bias, rows, in_dim, out_dim](Tensor& out) mutable {
        ConstMatMap g(out.grad().data(), rows, out_dim);
        if (weights.requires_grad()) {
            MatMap gw(weights.grad_buffer().data(), in_dim, out_dim);
            gw.noalias() += ConstMatMap(input.values().data(), rows, in_dim).transpose() * g;
        }
        if (bias.requires_grad()) {
            Eigen::Map<Eigen::RowVectorXd> gb(bias.grad_buffer().data(), out_dim);
            sum_rows(g, gb);
        }
        if (input.requires_grad()) {
            MatMap gx(input.grad_buffer().data(), rows, in_dim);
            gx.noalias() += g * ConstMatMap(weights.values().data(), in_dim, out_dim).transpose();
        }
    };
    return tape.record(op, std::move(shape), std::move(out_values), {input, weights, bias},
                       std::move(backward));
}

Tensor relu(Tape& tape, const Tensor& x) {
    Buffer out_values(x.values().begin(), x.values().end());
    for (double& v : out_values) v = v > 0.0 ? v : 0.0;
    auto backward = [x](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        const auto xv = x.values();
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (xv[i] > 0.0) gx[i] += g[i];
        }
    };
    return tape.record("relu", x.shape(), std::move(out_values), {x}, std::move(backward));
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
    Buffer out_values(x.size());
    const auto xv = x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        // Split on sign so exp() never overflows.
        if (xv[i] >= 0.0) {
            out_values[i] = 1.0 / (1.0 + std::exp(-xv[i]));
        } else {
            const double e = std::exp(xv[i]);
            out_values[i] = e / (1.0 + e);
        }
    }
    auto backward = [x](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        const auto s = out.values();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
    };
    return tape.record("sigmoid", x.shape(), std::move(out_values), {x}, std::move(backward));
}

Tensor multiply_channels(Tape& tape, const Tensor& x, const Tensor& gate) {
    const std::string op = "multiply_channels";
    if (x.rank() == 0) fail(op, "empty operand");
    const std::size_t channels = x.shape().back();
    std::size_t groups = 1;  // independent gate vectors
    if (gate.rank() == 1) {
        if (gate.dim(0) != channels) {
            fail(op, "gate " + shape_to_string(gate.shape()) + " cannot scale " +
                         shape_to_string(x.shape()));
        }
    } else if (gate.rank() == 2 && x.rank() >= 2 && gate.dim(0) == x.dim(0) &&
               gate.dim(1) == channels) {
        groups = gate.dim(0);
    } else {
        fail(op, "gate " + shape_to_string(gate.shape()) + " cannot scale " +
                     shape_to_string(x.shape()));
    }
    const std::size_t per_group = x.size() / groups;
    Buffer out_values(x.size());
    const auto xv = x.values();
    const auto gv = gate.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const std::size_t gidx = (i / per_group) * channels + i % channels;
        out_values[i] = xv[i] * gv[gidx];
    }
    auto backward = [x, gate, channels, per_group](Tensor& out) mutable {
        const auto g = out.grad();
        const auto xv = x.values();
        const auto gv = gate.values();
        if (x.requires_grad()) {
            auto gx = x.grad_buffer();
            for (std::size_t i = 0; i < gx.size(); ++i) {
                gx[i] += g[i] * gv[(i / per_group) * channels + i % channels];
            }
        }
        if (gate.requires_grad()) {
            auto gg = gate.grad_buffer();
            for (std::size_t i = 0; i < xv.size(); ++i) {
                gg[(i / per_group) * channels + i % channels] += g[i] * xv[i];
            }
        }
    };
    return tape.record(op, x.shape(), std::move(out_values), {x, gate}, std::move(backward));
}

Tensor maxpool2(Tape& tape, const Tensor& x) {
    const std::string op = "maxpool2";
    const MapDims d = feature_map_dims(op, x);
    if (d.height % 2 != 0 || d.width % 2 != 0) {
        fail(op, "spatial extents must be even, got " + shape_to_string(x.shape()));
    }
    const std::size_t ho = d.height / 2;
    const std::size_t wo = d.width / 2;
    const std::size_t c = d.channels;
    Buffer out_values(d.batch * ho * wo * c);
    auto argmax = std::make_shared<std::vector<std::size_t>>(out_values.size());
    const auto xv = x.values();
    for (std::size_t b = 0; b < d.batch; ++b) {
        for (std::size_t oy = 0; oy < ho; ++oy) {
            for (std::size_t ox = 0; ox < wo; ++ox) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    std::size_t best = ((b * d.height + 2 * oy) * d.width + 2 * ox) * c + ch;
                    for (std::size_t dy = 0; dy < 2; ++dy) {
                        for (std::size_t dx = 0; dx < 2; ++dx) {
                            const std::size_t idx =
                                ((b * d.height + 2 * oy + dy) * d.width + 2 * ox + dx) * c + ch;
                            if (xv[idx] > xv[best]) best = idx;  // strict: first max wins
                        }
                    }
                    const std::size_t o = ((b * ho + oy) * wo + ox) * c + ch;
                    out_values[o] = xv[best];
                    (*argmax)[o] = best;
                }
            }
        }
    }
    auto backward = [x, argmax](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        for (std::size_t o = 0; o < g.size(); ++o) gx[(*argmax)[o]] += g[o];
    };
    return tape.record(op, map_shape(d, ho, wo, c), std::move(out_values), {x},
                       std::move(backward));
}

Tensor global_avg_pool(Tape& tape, const Tensor& x) {
    const MapDims d = feature_map_dims("global_avg_pool", x);
    const std::size_t area = d.height * d.width;
    const std::size_t c = d.channels;
    Buffer out_values(d.batch * c, 0.0);
    const auto xv = x.values();
    for (std::size_t b = 0; b < d.batch; ++b) {
        for (std::size_t p = 0; p < area; ++p) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                out_values[b * c + ch] += xv[(b * area + p) * c + ch];
            }
        }
        for (std::size_t ch = 0; ch < c; ++ch) out_values[b * c + ch] /= static_cast<double>(area);
    }
    Shape shape = d.batched ? Shape{d.batch, c} : Shape{c};
    auto backward = [x, d, area, c](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        const double inv = 1.0 / static_cast<double>(area);
        for (std::size_t b = 0; b < d.batch; ++b) {
            for (std::size_t p = 0; p < area; ++p) {
                for (std::size_t ch = 0; ch < c; ++ch) {
                    gx[(b * area + p) * c + ch] += g[b * c + ch] * inv;
                }
            }
        }
    };
    return tape.record("global_avg_pool", std::move(shape), std::move(out_values), {x},
                       std::move(backward));
}

Tensor concat_channels(Tape& tape, const Tensor& a, const Tensor& b) {
    const std::string op = "concat_channels";
    if (!b.defined()) return a;
    if (a.rank() != b.rank() || a.rank() == 0 ||
        !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
        fail(op, "leading extents differ: " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
    }
    const std::size_t ca = a.shape().back();
    const std::size_t cb = b.shape().back();
    const std::size_t positions = a.size() / ca;
    Buffer out_values(positions * (ca + cb));
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t p = 0; p < positions; ++p) {
        std::copy_n(av.data() + p * ca, ca, out_values.data() + p * (ca + cb));
        std::copy_n(bv.data() + p * cb, cb, out_values.data() + p * (ca + cb) + ca);
    }
    Shape shape = a.shape();
    shape.back() = ca + cb;
    auto backward = [a, b, ca, cb, positions](Tensor& out) mutable {
        const auto g = out.grad();
        if (a.requires_grad()) {
            auto ga = a.grad_buffer();
            for (std::size_t p = 0; p < positions; ++p) {
                for (std::size_t i = 0; i < ca; ++i) ga[p * ca + i] += g[p * (ca + cb) + i];
            }
        }
        if (b.requires_grad()) {
            auto gb = b.grad_buffer();
            for (std::size_t p = 0; p < positions; ++p) {
                for (std::size_t i = 0; i < cb; ++i) gb[p * cb + i] += g[p * (ca + cb) + ca + i];
            }
        }
    };
    return tape.record(op, std::move(shape), std::move(out_values), {a, b}, std::move(backward));
}

Tensor tile_channels(Tape& tape, const Tensor& x, std::size_t n) {
    if (n == 0) fail("tile_channels", "repeat count must be positive");
    const std::size_t c = x.shape().back();
    const std::size_t rows = x.size() / c;
    Buffer out_values(rows * c * n);
    const auto xv = x.values();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < c * n; ++i) out_values[r * c * n + i] = xv[r * c + i % c];
    }
    Shape shape = x.shape();
    shape.back() = c * n;
    auto backward = [x, c, n, rows](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t i = 0; i < c * n; ++i) gx[r * c + i % c] += g[r * c * n + i];
        }
    };
    return tape.record("tile_channels", std::move(shape), std::move(out_values), {x},
                       std::move(backward));
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, Mode mode, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate < 1.0)) fail("dropout", "rate must lie in [0, 1)");
    if (mode == Mode::kEval || rate == 0.0) {
        Buffer values(x.values().begin(), x.values().end());
        auto backward = [x](Tensor& out) mutable { accumulate(x, out.grad()); };
        return tape.record("dropout", x.shape(), std::move(values), {x}, std::move(backward));
    }
    std::mt19937_64 rng(seed);
    const double keep_scale = 1.0 / (1.0 - rate);
    auto mask = std::make_shared<Buffer>(x.size());
    Buffer values(x.size());
    const auto xv = x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        (*mask)[i] = uniform01(rng) < rate ? 0.0 : keep_scale;
        values[i] = xv[i] * (*mask)[i];
    }
    auto backward = [x, mask](Tensor& out) mutable {
        auto gx = x.grad_buffer();
        const auto g = out.grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * (*mask)[i];
    };
    return tape.record("dropout", x.shape(), std::move(values), {x}, std::move(backward));
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
    if (shape_size(shape) != x.size()) {
        fail("reshape", "cannot view " + shape_to_string(x.shape()) + " as " +
                            shape_to_string(shape));
    }
    Buffer values(x.values().begin(), x.values().end());
    auto backward = [x](Tensor& out) mutable { accumulate(x, out.grad()); };
    return tape.record("reshape", std::move(shape), std::move(values), {x}, std::move(backward));
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double m = *std::max_element(p.begin(), p.end());
    double z = 0.0;
    for (double& v : p) {
        v = std::exp(v - m);
        z += v;
    }
    for (double& v : p) v /= z;
    return p;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const std::size_t> labels) {
    const std::string op = "softmax_cross_entropy";
    const auto [rows, classes] = vector_dims(op, logits);
    if (labels.size() != rows) {
        fail(op, std::to_string(labels.size()) + " labels for " + std::to_string(rows) + " rows");
    }
    auto probs = std::make_shared<Buffer>(rows * classes);
    double total = 0.0;
    const auto lv = logits.values();
    for (std::size_t r = 0; r < rows; ++r) {
        if (labels[r] >= classes) {
            fail(op, "label " + std::to_string(labels[r]) + " out of range for " +
                         std::to_string(classes) + " classes");
        }
        const double* row = lv.data() + r * classes;
        const double m = *std::max_element(row, row + classes);
        double z = 0.0;
        for (std::size_t j = 0; j < classes; ++j) z += std::exp(row[j] - m);
        const double log_z = std::log(z);
        for (std::size_t j = 0; j < classes; ++j) {
            (*probs)[r * classes + j] = std::exp(row[j] - m - log_z);
        }
        total += -(row[labels[r]] - m - log_z);
    }
    std::vector<std::size_t> label_copy(labels.begin(), labels.end());
    auto backward = [logits, probs, label_copy, rows, classes](Tensor& out) mutable {
        auto gl = logits.grad_buffer();
        const double scale = out.grad()[0] / static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < classes; ++j) {
                const double onehot = j == label_copy[r] ? 1.0 : 0.0;
                gl[r * classes + j] += scale * ((*probs)[r * classes + j] - onehot);
            }
        }
    };
    return tape.record(op, {1}, {total / static_cast<double>(rows)}, {logits},
                       std::move(backward));
}

Tensor sum(Tape& tape, const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    auto backward = [x](Tensor& out) mutable {
        const double g = out.grad()[0];
        for (double& v : x.grad_buffer()) v += g;
    };
    return tape.record("sum", {1}, {total}, {x}, std::move(backward));
}

Tensor mean(Tape& tape, const Tensor& x) {
    double total = 0.0;
    for (double v : x.values()) total += v;
    const double n = static_cast<double>(x.size());
    auto backward = [x, n](Tensor& out) mutable {
        const double g = out.grad()[0] / n;
        for (double& v : x.grad_buffer()) v += g;
    };
    return tape.record("mean", {1}, {total / n}, {x}, std::move(backward));
}

Tensor weighted_sum(Tape& tape, const Tensor& x, std::span<const double> weights) {
    if (weights.size() != x.size()) fail("weighted_sum", "weight count does not match tensor");
    double total = 0.0;
    const auto xv = x.values();
    for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * weights[i];
    std::vector<double> w(weights.begin(), weights.end());
    auto backward = [x, w](Tensor& out) mutable {
        const double g = out.grad()[0];
        auto gx = x.grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g * w[i];
    };
    return tape.record("weighted_sum", {1}, {total}, {x}, std::move(backward));
}

}  // namespace silrel::ad
