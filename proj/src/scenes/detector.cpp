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

#include "silrel/scenes/detector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "silrel/random.hpp"

namespace silrel::scenes {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

geo::BBox jitter(const geo::BBox& b, double sigma, double width, double height,
                 std::mt19937_64& rng) {
    if (sigma == 0.0) return b;
    std::normal_distribution<double> n01(0.0, 1.0);
    const double sx = sigma * b.width();
    const double sy = sigma * b.height();
    double x1 = std::clamp(b.x1() + sx * n01(rng), 0.0, width);
    double y1 = std::clamp(b.y1() + sy * n01(rng), 0.0, height);
    double x2 = std::clamp(b.x2() + sx * n01(rng), 0.0, width);
    double y2 = std::clamp(b.y2() + sy * n01(rng), 0.0, height);
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    // Keep at least one pixel of extent inside the canvas.
    if (x2 - x1 < 1.0) {
        x1 = std::min(x1, width - 1.0);
        x2 = x1 + 1.0;
    }
    if (y2 - y1 < 1.0) {
        y1 = std::min(y1, height - 1.0);
        y2 = y1 + 1.0;
    }
    return geo::BBox(x1, y1, x2, y2);
}

}  // namespace

void DetectorNoiseConfig::validate() const {
    if (!is_probability(flip_probability) || !is_probability(drop_probability) ||
        !is_probability(false_positive_max_score) || !is_probability(min_score)) {
        throw std::invalid_argument("detector noise: probabilities must lie in [0, 1]");
    }
    if (!(box_sigma >= 0.0) || !(score_sigma >= 0.0) || !(false_positive_rate >= 0.0)) {
        throw std::invalid_argument("detector noise: sigmas and rates must be non-negative");
    }
    if (!(nms_threshold > 0.0 && nms_threshold <= 1.0)) {
        throw std::invalid_argument("detector noise: nms threshold must lie in (0, 1]");
    }
}

DetectorNoiseConfig noise_profile(const std::string& name) {
    DetectorNoiseConfig n;
    if (name == "zero") return n;
    if (name == "light") {
        n.box_sigma = 0.02;
        n.flip_probability = 0.02;
        n.drop_probability = 0.02;
        n.false_positive_rate = 0.5;
        n.score_sigma = 0.1;
    } else if (name == "default") {
        n.box_sigma = 0.05;
        n.flip_probability = 0.05;
        n.drop_probability = 0.05;
        n.false_positive_rate = 1.0;
        n.score_sigma = 0.2;
    } else if (name == "heavy") {
        n.box_sigma = 0.1;
        n.flip_probability = 0.15;
        n.drop_probability = 0.1;
        n.false_positive_rate = 2.0;
        n.score_sigma = 0.3;
    } else {
        throw std::invalid_argument("unknown noise profile '" + name +
                                    "' (expected zero, light, default or heavy)");
    }
    return n;
}

std::vector<geo::ScoredBox> oracle_detect(const SceneAnnotation& scene, std::size_t num_categories,
                                          const DetectorNoiseConfig& noise) {
    noise.validate();
    if (num_categories == 0) throw std::invalid_argument("oracle_detect: empty vocabulary");
    const double w = static_cast<double>(scene.width);
    const double h = static_cast<double>(scene.height);
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> n01(0.0, 1.0);

    std::vector<geo::ScoredBox> raw;
    for (const auto& obj : scene.objects) {
        if (noise.drop_probability > 0.0 && uniform01(rng) < noise.drop_probability) continue;
        const geo::BBox box = jitter(obj.box, noise.box_sigma, w, h, rng);
        std::size_t category = obj.category;
        if (num_categories > 1 && noise.flip_probability > 0.0 &&
            uniform01(rng) < noise.flip_probability) {
            const std::size_t other = uniform_index(rng, num_categories - 1);
            category = other >= obj.category ? other + 1 : other;
        }
        double score = 1.0;
        if (noise.score_sigma > 0.0) {
            score = std::clamp(1.0 - std::abs(noise.score_sigma * n01(rng)), 0.05, 1.0);
        }
        raw.push_back({box, category, score});
    }

    if (noise.false_positive_rate > 0.0) {
        std::poisson_distribution<int> count(noise.false_positive_rate);
        const int n = count(rng);
        for (int k = 0; k < n; ++k) {
            for (int attempt = 0; attempt < 20; ++attempt) {
                const double bw = std::min(w, 8.0 + 40.0 * uniform01(rng));
                const double bh = std::min(h, 8.0 + 40.0 * uniform01(rng));
                const double x1 = (w - bw) * uniform01(rng);
                const double y1 = (h - bh) * uniform01(rng);
                const geo::BBox box(x1, y1, x1 + bw, y1 + bh);
                const bool clear = std::none_of(scene.objects.begin(), scene.objects.end(),
                                                [&](const ObjectInstance& o) {
                                                    return geo::iou(o.box, box) > 0.5;
                                                });
                if (!clear) continue;
                const double score = 0.05 + (noise.false_positive_max_score - 0.05) * uniform01(rng);
                raw.push_back({box, uniform_index(rng, num_categories), std::max(0.05, score)});
                break;
            }
        }
    }

    std::vector<geo::ScoredBox> out;
    for (std::size_t i : geo::nms_per_class(raw, noise.nms_threshold)) {
        if (raw[i].score >= noise.min_score) out.push_back(raw[i]);
    }
    return out;
}

}  // namespace silrel::scenes
