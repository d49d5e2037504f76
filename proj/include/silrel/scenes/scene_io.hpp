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

#include <filesystem>

#include "silrel/scenes/scene.hpp"

namespace silrel::scenes {

/// Scene files are JSON:
///   {"width": W, "height": H, "image": "<raster next to the file>",
///    "objects": [{"category": "<name>", "bbox": [x1, y1, x2, y2]}, ...],
///    "relations": [{"sub": i, "pred": "<name>", "obj": j}, ...]}
/// The raster is binary PPM (P6, 8-bit), stored beside the JSON file.
void save_scene_file(const SceneAnnotation& scene, const CategoryVocab& vocab,
                     const std::filesystem::path& path);
SceneAnnotation load_scene_file(const std::filesystem::path& path, const CategoryVocab& vocab);

/// {"object_categories": [...], "predicates": [...]} in index order.
void save_vocab_file(const CategoryVocab& vocab, const std::filesystem::path& path);
CategoryVocab load_vocab_file(const std::filesystem::path& path);

void write_ppm(const geo::Image& image, const std::filesystem::path& path);
geo::Image read_ppm(const std::filesystem::path& path);

}  // namespace silrel::scenes
