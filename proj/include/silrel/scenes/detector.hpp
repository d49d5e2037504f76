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
#include <vector>

#include "silrel/scenes/scene.hpp"

namespace silrel::scenes {

/// Noise model of the stand-in detector. All-zero noise reproduces the
/// ground truth exactly with score 1.
struct DetectorNoiseConfig {
    double box_sigma = 0.0;        // per-coordinate std as a fraction of box side
    double flip_probability = 0.0;
    double drop_probability = 0.0;
    double false_positive_rate = 0.0;  // expected false positives per image
    double score_sigma = 0.0;
    double false_positive_max_score = 0.3;
    double nms_threshold = 0.6;
    double min_score = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Named noise profiles: "zero", "light", "default", "heavy".
DetectorNoiseConfig noise_profile(const std::string& name);

/// Ground truth perturbed by `noise`, then per-class NMS at
/// noise.nms_threshold and a score >= noise.min_score filter. Detections keep
/// ground-truth order, with false positives appended.
std::vector<geo::ScoredBox> oracle_detect(const SceneAnnotation& scene, std::size_t num_categories,
                                          const DetectorNoiseConfig& noise);

}  // namespace silrel::scenes
