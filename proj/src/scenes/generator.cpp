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

#include "silrel/scenes/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "silrel/random.hpp"

namespace silrel::scenes {
namespace {

enum class Shape { kRectangle, kEllipse, kTriangle };

struct Style {
    Shape shape;
    std::array<std::uint8_t, 3> colour;
};

// Indexed like default_vocab().object_categories.
constexpr std::array<Style, 8> kStyles{{
    {Shape::kRectangle, {220, 40, 40}},
    {Shape::kRectangle, {40, 170, 60}},
    {Shape::kRectangle, {40, 80, 220}},
    {Shape::kEllipse, {230, 210, 40}},
    {Shape::kEllipse, {200, 50, 200}},
    {Shape::kEllipse, {40, 200, 210}},
    {Shape::kTriangle, {240, 140, 30}},
    {Shape::kTriangle, {110, 50, 170}},
}};

constexpr std::array<std::uint8_t, 3> kBackground{128, 128, 128};

// Boxes closer than this to an ambiguous configuration (touching edges,
// sliver overlaps, almost-containment) are rejected during placement.
constexpr double kClearance = 2.0;

bool covers(Shape shape, const geo::BBox& b, double x, double y) {
    switch (shape) {
        case Shape::kRectangle:
            return x >= b.x1() && x < b.x2() && y >= b.y1() && y < b.y2();
        case Shape::kEllipse: {
            const double u = (x - b.center_x()) / (0.5 * b.width());
            const double v = (y - b.center_y()) / (0.5 * b.height());
            return u * u + v * v <= 1.0;
        }
        case Shape::kTriangle: {
            // Apex at top centre, base along the bottom edge.
            if (y < b.y1() || y >= b.y2()) return false;
            const double t = (y - b.y1()) / b.height();
            const double half = 0.5 * b.width() * t;
            return std::abs(x - b.center_x()) <= half;
        }
    }
    return false;
}

double overlap_1d(double a1, double a2, double b1, double b2) {
    return std::min(a2, b2) - std::max(a1, b1);
}

// How far `b` sticks out of `a` (<= 0 when contained).
double protrusion(const geo::BBox& a, const geo::BBox& b) {
    return std::max({a.x1() - b.x1(), b.x2() - a.x2(), a.y1() - b.y1(), b.y2() - a.y2()});
}

bool clean_pair(const geo::BBox& a, const geo::BBox& b, double max_iou) {
    const double ox = overlap_1d(a.x1(), a.x2(), b.x1(), b.x2());
    const double oy = overlap_1d(a.y1(), a.y2(), b.y1(), b.y2());
    if (std::abs(ox) < kClearance || std::abs(oy) < kClearance) return false;
    if (ox > 0 && oy > 0) {
        const double pab = protrusion(a, b);
        const double pba = protrusion(b, a);
        if ((pab > 0 && pab < kClearance) || (pba > 0 && pba < kClearance)) return false;
        if (pab <= 0 && pab > -kClearance) return false;
        if (pba <= 0 && pba > -kClearance) return false;
    }
    return geo::iou(a, b) <= max_iou;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace

std::optional<std::size_t> relation_rule(const geo::BBox& s, const geo::BBox& o) {
    if (o.contains(s)) return kInside;
    if (s.intersects(o)) return kOverlapping;
    const bool x_overlap = overlap_1d(s.x1(), s.x2(), o.x1(), o.x2()) > 0;
    const bool y_overlap = overlap_1d(s.y1(), s.y2(), o.y1(), o.y2()) > 0;
    const double mean_h = 0.5 * (s.height() + o.height());
    const double mean_w = 0.5 * (s.width() + o.width());
    if (x_overlap && s.center_y() < o.center_y() - 0.25 * mean_h) return kAbove;
    if (x_overlap && s.center_y() > o.center_y() + 0.25 * mean_h) return kBelow;
    if (y_overlap && s.center_x() < o.center_x() - 0.25 * mean_w) return kLeftOf;
    if (y_overlap && s.center_x() > o.center_x() + 0.25 * mean_w) return kRightOf;
    return std::nullopt;
}

std::vector<RelationTriplet> derive_relations(const std::vector<ObjectInstance>& objects) {
    std::vector<RelationTriplet> out;
    for (auto [s, o] : enumerate_pairs(objects.size())) {
        if (auto p = relation_rule(objects[s].box, objects[o].box)) out.push_back({s, *p, o});
    }
    return out;
}

geo::Image render_scene(std::size_t width, std::size_t height,
                        const std::vector<ObjectInstance>& objects) {
    geo::Image img(width, height, kBackground[0], kBackground[1], kBackground[2]);
    for (const auto& obj : objects) {
        const Style& style = kStyles[obj.category % kStyles.size()];
        const auto& b = obj.box;
        const auto y_lo = static_cast<std::size_t>(std::max(0.0, std::floor(b.y1())));
        const auto y_hi = std::min(height, static_cast<std::size_t>(std::ceil(b.y2())));
        const auto x_lo = static_cast<std::size_t>(std::max(0.0, std::floor(b.x1())));
        const auto x_hi = std::min(width, static_cast<std::size_t>(std::ceil(b.x2())));
        for (std::size_t y = y_lo; y < y_hi; ++y) {
            for (std::size_t x = x_lo; x < x_hi; ++x) {
                if (!covers(style.shape, b, x + 0.5, y + 0.5)) continue;
                for (std::size_t c = 0; c < 3; ++c) img.rgb[(y * width + x) * 3 + c] = style.colour[c];
            }
        }
    }
    return img;
}

SceneAnnotation generate_synthetic_scene(const GeneratorConfig& config, std::uint64_t seed) {
    if (config.min_objects > config.max_objects || config.num_categories == 0 ||
        config.num_categories > kStyles.size() || config.min_side <= 0 ||
        config.max_side < config.min_side) {
        throw std::invalid_argument("generator config is inconsistent");
    }
    const double w = static_cast<double>(config.width);
    const double h = static_cast<double>(config.height);
    std::mt19937_64 rng(seed);
    const std::size_t count =
        config.min_objects + uniform_index(rng, config.max_objects - config.min_objects + 1);

    std::vector<ObjectInstance> objects;
    for (std::size_t k = 0; k < count; ++k) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt < config.max_attempts && !placed; ++attempt) {
            const std::size_t category = uniform_index(rng, config.num_categories);
            const double mode = uniform01(rng);
            double x1 = 0, y1 = 0, bw = 0, bh = 0;
            if (!objects.empty() && mode < config.p_nested) {
                const geo::BBox& host = objects[uniform_index(rng, objects.size())].box;
                const double room_w = host.width() - 2 * kClearance;
                const double room_h = host.height() - 2 * kClearance;
                if (room_w < config.min_side || room_h < config.min_side) continue;
                bw = std::round(uniform(rng, config.min_side, room_w));
                bh = std::round(uniform(rng, config.min_side, room_h));
                x1 = std::round(uniform(rng, host.x1() + kClearance, host.x2() - kClearance - bw));
                y1 = std::round(uniform(rng, host.y1() + kClearance, host.y2() - kClearance - bh));
            } else if (!objects.empty() && mode < config.p_nested + config.p_straddle) {
                const geo::BBox& host = objects[uniform_index(rng, objects.size())].box;
                bw = std::round(uniform(rng, config.min_side, config.max_side));
                bh = std::round(uniform(rng, config.min_side, config.max_side));
                // Centre the new box near a random point of the host's border.
                const double t = uniform01(rng);
                double cx = 0, cy = 0;
                switch (uniform_index(rng, 4)) {
                    case 0: cx = host.x1() + t * host.width(); cy = host.y1(); break;
                    case 1: cx = host.x1() + t * host.width(); cy = host.y2(); break;
                    case 2: cx = host.x1(); cy = host.y1() + t * host.height(); break;
                    default: cx = host.x2(); cy = host.y1() + t * host.height(); break;
                }
                x1 = std::round(cx - 0.5 * bw);
                y1 = std::round(cy - 0.5 * bh);
            } else {
                bw = std::round(uniform(rng, config.min_side, config.max_side));
                bh = std::round(uniform(rng, config.min_side, config.max_side));
                x1 = std::round(uniform(rng, 0.0, w - bw));
                y1 = std::round(uniform(rng, 0.0, h - bh));
            }
            if (bw < 1 || bh < 1 || x1 < 0 || y1 < 0 || x1 + bw > w || y1 + bh > h) continue;
            const geo::BBox box(x1, y1, x1 + bw, y1 + bh);
            const bool ok = std::all_of(objects.begin(), objects.end(), [&](const ObjectInstance& o) {
                return clean_pair(o.box, box, config.max_pair_iou);
            });
            if (ok) {
                objects.push_back({category, box});
                placed = true;
            }
        }
        if (!placed) {
            throw std::runtime_error("generate_synthetic_scene: could not place object " +
                                     std::to_string(k + 1) + " of " + std::to_string(count) +
                                     " after " + std::to_string(config.max_attempts) + " attempts");
        }
    }

    SceneAnnotation scene;
    scene.width = config.width;
    scene.height = config.height;
    scene.pixels = render_scene(config.width, config.height, objects);
    scene.relations = derive_relations(objects);
    scene.objects = std::move(objects);
    return scene;
}

}  // namespace silrel::scenes
