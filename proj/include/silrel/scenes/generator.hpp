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

#include <cstdint>
#include <optional>
#include <vector>

#include "silrel/scenes/scene.hpp"

namespace silrel::scenes {

/// Placement priors and canvas for synthetic scenes.
struct GeneratorConfig {
    std::size_t width = 128;
    std::size_t height = 128;
    std::size_t min_objects = 2;
    std::size_t max_objects = 5;
    std::size_t num_categories = 8;  // first N of the default vocabulary
    double min_side = 14.0;
    double max_side = 48.0;
    /// Probability that a new object is nested inside an existing one.
    double p_nested = 0.2;
    /// Probability that a new object is placed to straddle an existing one.
    double p_straddle = 0.2;
    /// Upper bound on pairwise IoU between objects (keeps NMS at 0.6 a no-op
    /// on ground truth).
    double max_pair_iou = 0.5;
    std::size_t max_attempts = 200;
};

/// Relation rules, first match wins per ordered pair (s, o):
///   inside       s box lies within o box
///   overlapping  boxes intersect with positive area
///   above        cy(s) < cy(o) - 0.25 * mean height, x-extents overlap
///   below        cy(s) > cy(o) + 0.25 * mean height, x-extents overlap
///   left-of      cx(s) < cx(o) - 0.25 * mean width,  y-extents overlap
///   right-of     cx(s) > cx(o) + 0.25 * mean width,  y-extents overlap
/// Pairs that are diagonal to each other get no relation.
std::optional<std::size_t> relation_rule(const geo::BBox& subject, const geo::BBox& object);

/// All triplets produced by relation_rule over ordered pairs, lexicographic.
std::vector<RelationTriplet> derive_relations(const std::vector<ObjectInstance>& objects);

/// Solid shapes on a neutral background; category c uses shape
/// (rectangle, ellipse, triangle) and a colour fixed per category.
geo::Image render_scene(std::size_t width, std::size_t height,
                        const std::vector<ObjectInstance>& objects);

/// Throws std::runtime_error when the requested objects cannot be placed
/// within max_attempts tries.
SceneAnnotation generate_synthetic_scene(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace silrel::scenes
