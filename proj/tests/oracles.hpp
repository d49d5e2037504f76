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

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "silrel/eval/evaluation.hpp"
#include "silrel/random.hpp"
#include "silrel/scenes/scene.hpp"

namespace silrel::oracles {

using geo::BBox;
using eval::GroundTruthRelation;
using eval::RelationPrediction;
using eval::TaskSetting;

/// IoU by counting covered pixel centres on a 128 x 128 integer grid.
inline double pixel_iou(const BBox& a, const BBox& b) {
    int inter = 0, uni = 0;
    for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
            const bool in_a = x >= a.x1() && x < a.x2() && y >= a.y1() && y < a.y2();
            const bool in_b = x >= b.x1() && x < b.x2() && y >= b.y1() && y < b.y2();
            inter += in_a && in_b;
            uni += in_a || in_b;
        }
    }
    return static_cast<double>(inter) / uni;
}

inline BBox hull(const BBox& a, const BBox& b) {
    return BBox(std::min(a.x1(), b.x1()), std::min(a.y1(), b.y1()), std::max(a.x2(), b.x2()),
                std::max(a.y2(), b.y2()));
}

inline RelationPrediction as_prediction(const GroundTruthRelation& gt, double score) {
    return {gt.subject, gt.object, gt.predicate, score};
}

// Largest number of ground truths certified by a one-to-one assignment from
// the top-k predictions, by exhaustive search over prediction subsets.
inline std::size_t exhaustive_recall(const std::vector<RelationPrediction>& preds,
                              const std::vector<GroundTruthRelation>& gts, std::size_t k,
                              TaskSetting setting) {
    std::vector<std::size_t> order(preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Insertion sort: equal scores keep input order.
    for (std::size_t i = 1; i < order.size(); ++i) {
        for (std::size_t j = i; j > 0 && preds[order[j]].score > preds[order[j - 1]].score; --j) {
            std::swap(order[j], order[j - 1]);
        }
    }
    order.resize(std::min(k, order.size()));
    const std::size_t n = order.size();
    std::vector<std::vector<int>> memo(gts.size() + 1, std::vector<int>(std::size_t{1} << n, -1));
    std::function<int(std::size_t, std::size_t)> best = [&](std::size_t g, std::size_t used) {
        if (g == gts.size()) return 0;
        int& m = memo[g][used];
        if (m >= 0) return m;
        m = best(g + 1, used);
        for (std::size_t p = 0; p < n; ++p) {
            if ((used >> p & 1) == 0 && match_triplet(preds[order[p]], gts[g], setting)) {
                m = std::max(m, 1 + best(g + 1, used | (std::size_t{1} << p)));
            }
        }
        return m;
    };
    return static_cast<std::size_t>(best(0, 0));
}

// All-point interpolated AP from the PR curve: each true positive at rank r
// contributes 1/G times the best precision at any rank >= r.
inline double pr_curve_ap(const std::vector<bool>& hits, std::size_t num_gt) {
    std::vector<double> precision;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < hits.size(); ++i) {
        tp += hits[i];
        precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
    }
    double ap = 0.0;
    for (std::size_t r = 0; r < hits.size(); ++r) {
        if (!hits[r]) continue;
        ap += *std::max_element(precision.begin() + static_cast<long>(r), precision.end()) /
              static_cast<double>(num_gt);
    }
    return ap;
}

struct RecallComparison {
    std::size_t checks = 0;
    std::size_t discrepancies = 0;
};

/// Random images of 2 to 6 objects and 1 to 4 predicates with up to 12
/// predictions (near copies of ground truth, wrong predicates, random pairs,
/// coarse scores so ties occur), each scored at K in {1, 5, 50} under all
/// three settings by recall_at_k_image and by exhaustive_recall.
inline RecallComparison compare_recall_with_exhaustive(std::uint64_t seed, int instances) {
    constexpr TaskSetting kSettings[] = {TaskSetting::kPredicateClassification,
                                         TaskSetting::kUnionBoxDetection,
                                         TaskSetting::kTwoBoxesDetection};
    std::mt19937_64 rng(seed);
    RecallComparison out;
    for (int trial = 0; trial < instances; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 5);
        const std::size_t num_pred = 1 + uniform_index(rng, 4);
        std::vector<scenes::ObjectInstance> objects;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = std::floor(uniform01(rng) * 90), y = std::floor(uniform01(rng) * 90);
            const double w = 8 + std::floor(uniform01(rng) * 30), h = 8 + std::floor(uniform01(rng) * 30);
            objects.push_back({uniform_index(rng, 3), BBox(x, y, x + w, y + h)});
        }
        std::vector<GroundTruthRelation> gts;
        for (const auto& [s, o] : scenes::enumerate_pairs(m)) {
            for (std::size_t p = 0; p < num_pred; ++p) {
                if (uniform01(rng) < 0.15) {
                    gts.push_back({{objects[s].category, objects[s].box},
                                   {objects[o].category, objects[o].box}, p});
                }
            }
        }
        std::vector<RelationPrediction> preds;
        const std::size_t n_preds = 1 + uniform_index(rng, 12);
        for (std::size_t i = 0; i < n_preds; ++i) {
            RelationPrediction p{{0, BBox(0, 0, 1, 1)}, {0, BBox(0, 0, 1, 1)}, 0, 0.0};
            if (!gts.empty() && uniform01(rng) < 0.7) {
                p = as_prediction(gts[uniform_index(rng, gts.size())], 0.0);
                auto nudge = [&](const BBox& b) {
                    if (uniform01(rng) < 0.5) return b;
                    const double d = std::floor(uniform01(rng) * 9) - 4;
                    return BBox(std::max(0.0, b.x1() + d), b.y1(), b.x2() + 4, b.y2());
                };
                p.subject.box = nudge(p.subject.box);
                p.object.box = nudge(p.object.box);
                if (uniform01(rng) < 0.2) p.predicate = uniform_index(rng, num_pred);
            } else {
                const auto s = uniform_index(rng, m);
                const auto o = (s + 1 + uniform_index(rng, m - 1)) % m;
                p = {{objects[s].category, objects[s].box}, {objects[o].category, objects[o].box},
                     uniform_index(rng, num_pred), 0.0};
            }
            p.score = std::floor(uniform01(rng) * 5) / 4.0;
            preds.push_back(p);
        }
        for (std::size_t k : {1, 5, 50}) {
            for (auto setting : kSettings) {
                ++out.checks;
                const auto greedy = eval::recall_at_k_image(preds, gts, k, setting);
                if (greedy.total != gts.size() ||
                    greedy.recalled != exhaustive_recall(preds, gts, k, setting)) {
                    ++out.discrepancies;
                }
            }
        }
    }
    return out;
}

}  // namespace silrel::oracles
