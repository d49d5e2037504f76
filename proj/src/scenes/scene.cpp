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

#include "silrel/scenes/scene.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace silrel::scenes {
namespace {

std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                     const char* what) {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument(std::string("unknown ") + what + " '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
}

void check_unique(const std::vector<std::string>& names, const char* what) {
    if (names.empty()) throw std::invalid_argument(std::string("vocabulary has no ") + what);
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw std::invalid_argument(std::string("duplicate ") + what + " name '" + n + "'");
        }
    }
}

}  // namespace

std::size_t CategoryVocab::category_index(const std::string& name) const {
    return index_of(object_categories, name, "object category");
}

std::size_t CategoryVocab::predicate_index(const std::string& name) const {
    return index_of(predicates, name, "predicate");
}

void CategoryVocab::validate() const {
    check_unique(object_categories, "object categories");
    check_unique(predicates, "predicates");
}

CategoryVocab default_vocab() {
    return CategoryVocab{
        {"red_rectangle", "green_rectangle", "blue_rectangle", "yellow_ellipse",
         "magenta_ellipse", "cyan_ellipse", "orange_triangle", "purple_triangle"},
        {"above", "below", "left-of", "right-of", "inside", "overlapping"}};
}

void SceneAnnotation::validate(const CategoryVocab& vocab) const {
    if (width == 0 || height == 0) throw std::invalid_argument("scene has an empty canvas");
    if (pixels.width != width || pixels.height != height) {
        throw std::invalid_argument("scene raster size does not match width/height");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        if (o.category >= vocab.num_categories()) {
            throw std::invalid_argument("object " + std::to_string(i) + " has unknown category");
        }
        if (o.box.x1() < 0 || o.box.y1() < 0 || o.box.x2() > static_cast<double>(width) ||
            o.box.y2() > static_cast<double>(height)) {
            throw std::invalid_argument("object " + std::to_string(i) + " box leaves the image");
        }
    }
    std::set<RelationTriplet> seen;
    for (const auto& r : relations) {
        if (r.subject >= objects.size() || r.object >= objects.size()) {
            throw std::invalid_argument("relation references object " +
                                        std::to_string(std::max(r.subject, r.object)) + " of " +
                                        std::to_string(objects.size()));
        }
        if (r.subject == r.object) throw std::invalid_argument("relation with subject == object");
        if (r.predicate >= vocab.num_predicates()) {
            throw std::invalid_argument("relation has unknown predicate");
        }
        if (!seen.insert(r).second) throw std::invalid_argument("duplicate relation triplet");
    }
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t m) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (m < 2) return pairs;
    pairs.reserve(m * (m - 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

std::vector<double> category_difference_vector(std::size_t subject_category,
                                               std::size_t object_category,
                                               std::size_t num_categories) {
    if (subject_category >= num_categories || object_category >= num_categories) {
        throw std::invalid_argument("category index out of range for vocabulary of " +
                                    std::to_string(num_categories));
    }
    std::vector<double> diff(num_categories, 0.0);
    diff[subject_category] += 1.0;
    diff[object_category] -= 1.0;
    return diff;
}

}  // namespace silrel::scenes
