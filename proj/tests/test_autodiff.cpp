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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "silrel/autodiff/checkpoint.hpp"
#include "silrel/autodiff/gradcheck.hpp"
#include "silrel/autodiff/gradcheck_suite.hpp"
#include "silrel/autodiff/init.hpp"
#include "silrel/autodiff/ops.hpp"
#include "silrel/autodiff/optimizer.hpp"

using namespace silrel::ad;

namespace {

Tensor leaf(Shape shape, std::vector<double> values) {
    return Tensor(std::move(shape), std::move(values), true);
}

std::vector<double> to_vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// Straight nested-loop cross-correlation, independent of the im2col path.
std::vector<double> reference_conv(const Tensor& in, const Tensor& k, const Tensor& b,
                                   std::size_t stride, std::size_t pad) {
    const long h = in.dim(0), w = in.dim(1), cin = in.dim(2);
    const long ks = k.dim(0), cout = k.dim(3);
    const long ho = (h + 2 * pad - ks) / stride + 1, wo = (w + 2 * pad - ks) / stride + 1;
    std::vector<double> out(ho * wo * cout);
    for (long oy = 0; oy < ho; ++oy)
        for (long ox = 0; ox < wo; ++ox)
            for (long co = 0; co < cout; ++co) {
                double acc = b[co];
                for (long ky = 0; ky < ks; ++ky)
                    for (long kx = 0; kx < ks; ++kx)
                        for (long ci = 0; ci < cin; ++ci) {
                            const long iy = oy * stride + ky - pad, ix = ox * stride + kx - pad;
                            if (iy < 0 || ix < 0 || iy >= h || ix >= w) continue;
                            acc += in[(iy * w + ix) * cin + ci] *
                                   k[((ky * ks + kx) * cin + ci) * cout + co];
                        }
                out[(oy * wo + ox) * cout + co] = acc;
            }
    return out;
}

}  // namespace

TEST_CASE("tensor rejects zero extents and mismatched value counts") {
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), std::invalid_argument);
    Tensor t = Tensor::filled({2, 3}, 1.5);
    CHECK(t.size() == 6);
    CHECK_FALSE(t.has_grad());
}

TEST_CASE("xavier_init bounds, determinism and mean") {
    Tensor a = xavier_init({3, 3}, 3, 3, 7);
    for (double v : a.values()) CHECK(std::abs(v) <= 1.0);

    Tensor b = xavier_init({3, 3}, 3, 3, 7);
    CHECK(to_vec(a) == to_vec(b));

    Tensor big = xavier_init({10000}, 50, 50, 11);
    const double bound = std::sqrt(6.0 / 100.0);
    double m = 0.0;
    for (double v : big.values()) {
        CHECK(std::abs(v) <= bound);
        m += v;
    }
    m /= 10000.0;
    // Uniform on [-b, b] has std b / sqrt(3); three standard errors of the mean.
    CHECK(std::abs(m) < 3.0 * (bound / std::sqrt(3.0)) / std::sqrt(10000.0));

    CHECK_THROWS_AS(xavier_init({2}, 0, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(xavier_init({0}, 1, 3, 1), std::invalid_argument);
}

TEST_CASE("conv2d examples") {
    Tape tape;
    auto y = conv2d(tape, leaf({1, 1, 1}, {5}), leaf({1, 1, 1, 1}, {1}), leaf({1}, {0}), 1, 0);
    CHECK(to_vec(y) == std::vector<double>{5});

    auto z = conv2d(tape, leaf({2, 2, 1}, {1, 2, 3, 4}), leaf({2, 2, 1, 1}, {1, 0, 0, 1}),
                    leaf({1}, {0}), 1, 0);
    CHECK(z.shape() == Shape{1, 1, 1});
    CHECK(z[0] == 5.0);

    std::mt19937_64 rng(3);
    Tensor in = random_tensor({5, 4, 2}, rng, -1, 1);
    auto zero = conv2d(tape, in, Tensor::zeros({3, 3, 2, 3}), Tensor::zeros({3}), 1, 1);
    for (double v : zero.values()) CHECK(v == 0.0);

    CHECK_THROWS_AS(conv2d(tape, in, Tensor::zeros({3, 3, 1, 3}), Tensor::zeros({3}), 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(conv2d(tape, in, Tensor::zeros({7, 7, 2, 3}), Tensor::zeros({3}), 1, 0),
                    std::invalid_argument);
}

TEST_CASE("conv2d agrees with the nested-loop reference") {
    std::mt19937_64 rng(17);
    for (std::size_t stride : {1u, 2u}) {
        for (std::size_t pad : {0u, 1u, 2u}) {
            Tensor in = random_tensor({7, 6, 3}, rng, -1, 1);
            Tensor k = random_tensor({3, 3, 3, 4}, rng, -1, 1);
            Tensor b = random_tensor({4}, rng, -1, 1);
            Tape tape;
            auto out = conv2d(tape, in, k, b, stride, pad);
            const auto ref = reference_conv(in, k, b, stride, pad);
            REQUIRE(out.size() == ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("conv2d with 1x1 identity kernels is the identity map") {
    std::mt19937_64 rng(5);
    Tensor in = random_tensor({4, 3, 3}, rng, -2, 2);
    std::vector<double> eye(9, 0.0);
    for (int c = 0; c < 3; ++c) eye[c * 3 + c] = 1.0;
    Tape tape;
    auto out = conv2d(tape, in, leaf({1, 1, 3, 3}, eye), Tensor::zeros({3}), 1, 0);
    CHECK(to_vec(out) == to_vec(in));
}

TEST_CASE("fully_connected examples") {
    Tape tape;
    auto bias = leaf({2}, {0.5, -1});
    auto y0 = fully_connected(tape, Tensor::zeros({3}), leaf({3, 2}, {1, 2, 3, 4, 5, 6}), bias);
    CHECK(to_vec(y0) == to_vec(bias));

    auto y1 = fully_connected(tape, leaf({2}, {4, -3}), leaf({2, 2}, {1, 0, 0, 1}), leaf({2}, {0, 0}));
    CHECK(to_vec(y1) == std::vector<double>{4, -3});

    auto y2 = fully_connected(tape, leaf({2}, {1, 2}), leaf({2, 2}, {1, 0, 0, 3}), leaf({2}, {1, 1}));
    CHECK(to_vec(y2) == std::vector<double>{2, 7});

    CHECK_THROWS_AS(fully_connected(tape, leaf({3}, {1, 2, 3}), leaf({2, 2}, {1, 0, 0, 3}), leaf({2}, {1, 1})),
                    std::invalid_argument);
    CHECK_THROWS_AS(fully_connected(tape, leaf({2}, {1, 2}), leaf({2, 2}, {1, 0, 0, 3}), leaf({3}, {1, 1, 1})),
                    std::invalid_argument);
}

TEST_CASE("elementwise examples") {
    Tape tape;
    CHECK(to_vec(relu(tape, leaf({3}, {-1, 0, 2}))) == std::vector<double>{0, 0, 2});
    CHECK(sigmoid(tape, leaf({1}, {0})).item() == 0.5);
    auto big = sigmoid(tape, leaf({2}, {-800, 800}));
    CHECK(all_finite(big.values()));
    CHECK(big[0] == 0.0);
    CHECK(big[1] == 1.0);

    std::mt19937_64 rng(9);
    Tensor x = random_tensor({2, 3, 4}, rng, -1, 1);
    CHECK(to_vec(multiply_channels(tape, x, Tensor::filled({4}, 1.0))) == to_vec(x));
    CHECK_THROWS_AS(multiply_channels(tape, x, Tensor::filled({3}, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(multiply_channels(tape, x, Tensor::filled({3, 4}, 1.0)), std::invalid_argument);
}

TEST_CASE("relu subgradient at zero is zero") {
    Tape tape;
    Tensor x = leaf({3}, {-1, 0, 2});
    Tensor loss = sum(tape, relu(tape, x));
    tape.backward(loss);
    CHECK(to_vec(Tensor({3}, {x.grad()[0], x.grad()[1], x.grad()[2]})) == std::vector<double>{0, 0, 1});
}

TEST_CASE("maxpool2 examples and tie routing") {
    Tape tape;
    auto c = maxpool2(tape, Tensor::filled({4, 4, 2}, 3.25));
    CHECK(c.shape() == Shape{2, 2, 2});
    for (double v : c.values()) CHECK(v == 3.25);

    CHECK(maxpool2(tape, leaf({2, 2, 1}, {1, 2, 3, 4})).item() == 4.0);

    Tensor tie = leaf({2, 2, 1}, {7, 7, 0, 0});
    Tape t2;
    Tensor loss = sum(t2, maxpool2(t2, tie));
    t2.backward(loss);
    CHECK(to_vec(Tensor({4}, tie.grad())) == std::vector<double>{1, 0, 0, 0});

    CHECK_THROWS_AS(maxpool2(tape, Tensor::zeros({3, 4, 1})), std::invalid_argument);
}

TEST_CASE("global_avg_pool examples") {
    Tape tape;
    auto v = global_avg_pool(tape, Tensor::filled({3, 2, 2}, -1.5));
    CHECK(to_vec(v) == std::vector<double>{-1.5, -1.5});
    CHECK(global_avg_pool(tape, leaf({2, 1, 1}, {3, 5})).item() == 4.0);

    Tape t2;
    Tensor x = leaf({2, 3, 2}, std::vector<double>(12, 0.7));
    Tensor loss = sum(t2, global_avg_pool(t2, x));
    t2.backward(loss);
    for (double g : x.grad()) CHECK(g == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("concat_channels examples") {
    std::mt19937_64 rng(2);
    Tensor a = random_tensor({2, 2, 3}, rng, -1, 1);
    Tensor b = random_tensor({2, 2, 2}, rng, -1, 1);
    Tape tape;
    CHECK(to_vec(concat_channels(tape, a, Tensor{})) == to_vec(a));
    Tensor ab = concat_channels(tape, a, b);
    for (std::size_t p = 0; p < 4; ++p) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(ab[p * 5 + c] == a[p * 3 + c]);
        for (std::size_t c = 0; c < 2; ++c) CHECK(ab[p * 5 + 3 + c] == b[p * 2 + c]);
    }
    Tensor loss = sum(tape, ab);
    tape.backward(loss);
    for (double g : a.grad()) CHECK(g == 1.0);
    for (double g : b.grad()) CHECK(g == 1.0);
    Tape t2;
    CHECK_THROWS_AS(concat_channels(t2, a, Tensor::zeros({2, 3, 2})), std::invalid_argument);
}

TEST_CASE("dropout examples") {
    std::mt19937_64 rng(4);
    Tensor x = random_tensor({50}, rng, -1, 1);
    Tape tape;
    CHECK(to_vec(dropout(tape, x, 0.5, Mode::kEval, 1)) == to_vec(x));
    CHECK(to_vec(dropout(tape, x, 0.0, Mode::kTrain, 1)) == to_vec(x));
    CHECK(to_vec(dropout(tape, x, 0.3, Mode::kTrain, 8)) == to_vec(dropout(tape, x, 0.3, Mode::kTrain, 8)));

    Tensor ones = Tensor::filled({100000}, 1.0);
    auto d = dropout(tape, ones, 0.5, Mode::kTrain, 99);
    double m = 0.0;
    for (double v : d.values()) {
        CHECK((v == 0.0 || v == 2.0));
        m += v;
    }
    m /= 100000.0;
    // Each output is 2 * Bernoulli(0.5): std 1, so the mean has std 1/sqrt(n).
    CHECK(std::abs(m - 1.0) < 3.0 * std::sqrt(1.0 / 100000.0));

    CHECK_THROWS_AS(dropout(tape, x, 1.0, Mode::kTrain, 1), std::invalid_argument);
    CHECK_THROWS_AS(dropout(tape, x, -0.1, Mode::kEval, 1), std::invalid_argument);
}

TEST_CASE("softmax_cross_entropy examples") {
    Tape tape;
    const std::vector<std::size_t> l0{0};
    CHECK(softmax_cross_entropy(tape, Tensor::filled({6}, 0.3), l0).item() ==
          doctest::Approx(std::log(6.0)).epsilon(1e-15));
    CHECK(softmax_cross_entropy(tape, leaf({2}, {100, 0}), l0).item() < 1e-6);
    // -log(e / (e + e^2)) = ln(1 + e) ~= 1.3133
    const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0)));
    CHECK(expected == doctest::Approx(1.3133).epsilon(1e-4));
    CHECK(softmax_cross_entropy(tape, leaf({2}, {1, 2}), l0).item() ==
          doctest::Approx(expected).epsilon(1e-14));
    auto huge = softmax_cross_entropy(tape, leaf({3}, {1e300, -1e300, 0}), std::vector<std::size_t>{1});
    CHECK(std::isfinite(huge.item()));
    const std::vector<std::size_t> bad{2};
    CHECK_THROWS_AS(softmax_cross_entropy(tape, leaf({2}, {1, 2}), bad), std::invalid_argument);
}

TEST_CASE("softmax_cross_entropy is non-negative and its gradient is softmax - onehot") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        Tensor logits = random_tensor({5}, rng, -20, 20);
        const std::vector<std::size_t> label{static_cast<std::size_t>(trial % 5)};
        Tape tape;
        Tensor loss = softmax_cross_entropy(tape, logits, label);
        CHECK(loss.item() >= 0.0);
        tape.backward(loss);
        const auto p = softmax(logits.values());
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(logits.grad()[j] == doctest::Approx(p[j] - (j == label[0] ? 1.0 : 0.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("backward visits every node once and populates reachable grads") {
    Tape tape;
    Tensor w = leaf({2, 2}, {1, 2, 3, 4});
    Tensor b = leaf({2}, {0, 1});
    Tensor unused = leaf({1}, {3});
    Tensor x = Tensor({2}, {1, -1});
    Tensor h = relu(tape, fully_connected(tape, x, w, b));
    Tensor side = sigmoid(tape, unused);  // not reachable from loss
    Tensor loss = mean(tape, h);
    tape.backward(loss);
    CHECK(tape.visited() == tape.size());
    CHECK(w.has_grad());
    CHECK(b.has_grad());
    CHECK_FALSE(x.has_grad());
    CHECK_FALSE(unused.has_grad());
    CHECK_THROWS_AS(tape.backward(loss), std::logic_error);
    (void)side;
}

TEST_CASE("optimizer semantics") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        Tensor p = leaf({3}, {1, -2, 3});
        p.grad_buffer();
        Optimizer opt({});
        std::vector<Tensor> params{p};
        opt.step(params);
        CHECK(to_vec(p) == std::vector<double>{1, -2, 3});
        CHECK(opt.step_count() == 1);
    }
    SUBCASE("adaptive step moves against the gradient sign") {
        for (double g : {0.25, -3.0}) {
            Tensor p = leaf({1}, {0.5});
            p.grad_buffer()[0] = g;
            Optimizer opt({});
            std::vector<Tensor> params{p};
            opt.step(params);
            CHECK((p[0] - 0.5) * g < 0.0);
        }
    }
    SUBCASE("momentum mode and counter") {
        Tensor p = leaf({1}, {1.0});
        OptimizerConfig cfg;
        cfg.kind = OptimizerKind::kMomentum;
        cfg.learning_rate = 0.1;
        Optimizer opt(cfg);
        std::vector<Tensor> params{p};
        for (int i = 1; i <= 3; ++i) {
            p.zero_grad();
            p.grad_buffer()[0] = 1.0;
            opt.step(params);
            CHECK(opt.step_count() == static_cast<std::uint64_t>(i));
        }
        // velocity 1, 1.9, 2.71 -> 1 - 0.1 * 5.61
        CHECK(p[0] == doctest::Approx(1.0 - 0.561).epsilon(1e-12));
        CHECK(opt.state().first[0].size() == 1);
    }
    SUBCASE("learning rate zero is a no-op") {
        Tensor p = leaf({2}, {1, 2});
        p.grad_buffer()[0] = 5.0;
        OptimizerConfig cfg;
        cfg.learning_rate = 0.0;
        Optimizer opt(cfg);
        std::vector<Tensor> params{p};
        opt.step(params);
        opt.step(params);
        CHECK(to_vec(p) == std::vector<double>{1, 2});
    }
}

TEST_CASE("finite_difference_check closed-form and linear cases") {
    ScalarFn square = [](Tape& t, const std::vector<Tensor>& in) {
        return sum(t, multiply_channels(t, in[0], in[0]));
    };
    Tensor x = leaf({1}, {3.0});
    Tape tape;
    Tensor y = square(tape, {x});
    tape.backward(y);
    CHECK(x.grad()[0] == 6.0);
    auto r = finite_difference_check(square, {x}, {});
    CHECK(r.max_rel_error < 1e-8);
    CHECK(x[0] == 3.0);  // restored

    std::mt19937_64 rng(1);
    Tensor v = random_tensor({20}, rng, -5, 5);
    std::vector<double> coeffs(20);
    for (double& c : coeffs) c = uniform01(rng) * 4 - 2;
    ScalarFn linear = [coeffs](Tape& t, const std::vector<Tensor>& in) {
        return weighted_sum(t, in[0], coeffs);
    };
    CHECK(finite_difference_check(linear, {v}, {}).max_rel_error < 1e-9);
}

TEST_CASE("every registered op passes finite differences at 10 seeds") {
    for (const auto& c : op_gradcheck_cases()) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            auto [fn, inputs] = c.make(seed);
            auto r = finite_difference_check(fn, inputs, c.options);
            INFO(c.name << " seed " << seed);
            CHECK(r.max_rel_error < 1e-4);
            CHECK(r.coordinates > 0);
        }
    }
}

TEST_CASE("corrupted gradient fixture is caught") {
    auto c = corrupted_gradient_case();
    auto [fn, inputs] = c.make(3);
    CHECK(finite_difference_check(fn, inputs, c.options).max_rel_error > 1e-4);
}

TEST_CASE("seeded training step replays bit-exactly") {
    auto run = [] {
        Tensor w1 = xavier_init({6, 8}, 6, 8, 1);
        Tensor b1 = Tensor::zeros({8}, true);
        Tensor w2 = xavier_init({8, 3}, 8, 3, 2);
        Tensor b2 = Tensor::zeros({3}, true);
        std::vector<Tensor> params{w1, b1, w2, b2};
        Optimizer opt({});
        std::mt19937_64 rng(5);
        Tensor x = random_tensor({4, 6}, rng, -1, 1, false);
        const std::vector<std::size_t> labels{0, 1, 2, 1};
        for (int step = 0; step < 3; ++step) {
            for (Tensor& p : params) p.zero_grad();
            Tape tape;
            Tensor h = dropout(tape, relu(tape, fully_connected(tape, x, w1, b1)), 0.5, Mode::kTrain, 100 + step);
            Tensor loss = softmax_cross_entropy(tape, fully_connected(tape, h, w2, b2), labels);
            tape.backward(loss);
            opt.step(params);
        }
        std::vector<double> flat;
        for (const Tensor& p : params) flat.insert(flat.end(), p.values().begin(), p.values().end());
        return flat;
    };
    CHECK(run() == run());
}

TEST_CASE("checkpoint round-trip is value-exact") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "silrel_ckpt_test.bin";
    Checkpoint ckpt;
    ckpt.manifest = R"({"variant":"full"})";
    std::mt19937_64 rng(12);
    ckpt.tensors["vin.conv1.kernels"] = random_tensor({3, 3, 5, 4}, rng, -1e3, 1e3);
    ckpt.tensors["cls.fc3.bias"] = Tensor({3}, {0.1, -0.0, 5e-320});
    write_checkpoint(path, ckpt);
    Checkpoint back = read_checkpoint(path);
    CHECK(back.manifest == ckpt.manifest);
    REQUIRE(back.tensors.size() == 2);
    for (const auto& [name, t] : ckpt.tensors) {
        const Tensor& u = back.tensors.at(name);
        CHECK(u.shape() == t.shape());
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(std::bit_cast<std::uint64_t>(u[i]) == std::bit_cast<std::uint64_t>(t[i]));
        }
    }
    {
        std::ofstream truncated(path, std::ios::binary | std::ios::trunc);
        truncated << "SILCKPT1\x05";
    }
    CHECK_THROWS_AS(read_checkpoint(path), std::runtime_error);
    {
        std::ofstream junk(path, std::ios::binary | std::ios::trunc);
        junk << "not a checkpoint";
    }
    CHECK_THROWS_AS(read_checkpoint(path), std::runtime_error);
    fs::remove(path);
}
