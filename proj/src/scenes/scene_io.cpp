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

#include "silrel/scenes/scene_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace silrel::scenes {
namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text << '\n';
}

}  // namespace

void write_ppm(const geo::Image& image, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(image.rgb.data()),
             static_cast<std::streamsize>(image.rgb.size()));
}

geo::Image read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    is >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) {
        throw std::runtime_error(path.string() + ": not an 8-bit binary PPM");
    }
    is.get();  // single whitespace before the raster
    geo::Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(w * h * 3);
    if (!is.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()))) {
        throw std::runtime_error(path.string() + ": truncated raster");
    }
    return img;
}

void save_scene_file(const SceneAnnotation& scene, const CategoryVocab& vocab,
                     const std::filesystem::path& path) {
    scene.validate(vocab);
    std::filesystem::path raster = path;
    raster.replace_extension(".ppm");
    json doc;
    doc["width"] = scene.width;
    doc["height"] = scene.height;
    doc["image"] = raster.filename().string();
    doc["objects"] = json::array();
    for (const auto& o : scene.objects) {
        doc["objects"].push_back({{"category", vocab.object_categories.at(o.category)},
                                  {"bbox", {o.box.x1(), o.box.y1(), o.box.x2(), o.box.y2()}}});
    }
    doc["relations"] = json::array();
    for (const auto& r : scene.relations) {
        doc["relations"].push_back(
            {{"sub", r.subject}, {"pred", vocab.predicates.at(r.predicate)}, {"obj", r.object}});
    }
    write_text(path, doc.dump(1));
    write_ppm(scene.pixels, raster);
}

SceneAnnotation load_scene_file(const std::filesystem::path& path, const CategoryVocab& vocab) {
    const json doc = read_json(path);
    SceneAnnotation scene;
    try {
        scene.width = doc.at("width").get<std::size_t>();
        scene.height = doc.at("height").get<std::size_t>();
        scene.pixels = read_ppm(path.parent_path() / doc.at("image").get<std::string>());
        for (const auto& o : doc.at("objects")) {
            const auto& b = o.at("bbox");
            if (!b.is_array() || b.size() != 4) throw std::invalid_argument("bbox needs 4 numbers");
            scene.objects.push_back({vocab.category_index(o.at("category").get<std::string>()),
                                     geo::BBox(b[0].get<double>(), b[1].get<double>(),
                                               b[2].get<double>(), b[3].get<double>())});
        }
        for (const auto& r : doc.at("relations")) {
            scene.relations.push_back({r.at("sub").get<std::size_t>(),
                                       vocab.predicate_index(r.at("pred").get<std::string>()),
                                       r.at("obj").get<std::size_t>()});
        }
        scene.validate(vocab);
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return scene;
}

void save_vocab_file(const CategoryVocab& vocab, const std::filesystem::path& path) {
    vocab.validate();
    json doc;
    doc["object_categories"] = vocab.object_categories;
    doc["predicates"] = vocab.predicates;
    write_text(path, doc.dump(1));
}

CategoryVocab load_vocab_file(const std::filesystem::path& path) {
    const json doc = read_json(path);
    CategoryVocab vocab;
    try {
        vocab.object_categories = doc.at("object_categories").get<std::vector<std::string>>();
        vocab.predicates = doc.at("predicates").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    vocab.validate();
    return vocab;
}

}  // namespace silrel::scenes
