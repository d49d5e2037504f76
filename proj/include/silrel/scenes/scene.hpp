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

#include <cstddef>
#include <string>
#include <vector>

#include "silrel/geometry/geometry.hpp"

namespace silrel::scenes {

/// Object category and predicate names; the index of a name is its class id.
struct CategoryVocab {
    std::vector<std::string> object_categories;
    std::vector<std::string> predicates;

    std::size_t num_categories() const { return object_categories.size(); }
    std::size_t num_predicates() const { return predicates.size(); }
    std::size_t category_index(const std::string& name) const;
    std::size_t predicate_index(const std::string& name) const;
    /// Throws if either list is empty or contains duplicates.
    void validate() const;

    friend bool operator==(const CategoryVocab&, const CategoryVocab&) = default;
};

/// Predicate ids of the built-in spatial vocabulary.
enum Predicate : std::size_t {
    kAbove = 0,
    kBelow = 1,
    kLeftOf = 2,
    kRightOf = 3,
    kInside = 4,
    kOverlapping = 5,
};

/// 8 shape-colour categories and the 6 spatial predicates above.
CategoryVocab default_vocab();

struct ObjectInstance {
    std::size_t category = 0;
    geo::BBox box;

    friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

struct RelationTriplet {
    std::size_t subject = 0;
    std::size_t predicate = 0;
    std::size_t object = 0;

    friend bool operator==(const RelationTriplet&, const RelationTriplet&) = default;
    friend auto operator<=>(const RelationTriplet&, const RelationTriplet&) = default;
};

struct SceneAnnotation {
    std::size_t width = 0;
    std::size_t height = 0;
    geo::Image pixels;
    std::vector<ObjectInstance> objects;
    std::vector<RelationTriplet> relations;

    /// Checks boxes against image bounds, relation indices, subject != object,
    /// triplet uniqueness and class ids against `vocab`.
    void validate(const CategoryVocab& vocab) const;

    friend bool operator==(const SceneAnnotation&, const SceneAnnotation&) = default;
};

/// Ordered (subject, object) index pairs with distinct members, in
/// lexicographic order: m(m - 1) pairs for m objects.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t m);

/// one_hot(subject) - one_hot(object), length N.
std::vector<double> category_difference_vector(std::size_t subject_category,
                                               std::size_t object_category,
                                               std::size_t num_categories);

}  // namespace silrel::scenes
