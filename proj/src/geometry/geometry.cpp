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

#include "silrel/geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace silrel::geo {

BBox::BBox(double x1, double y1, double x2, double y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
    if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2)) {
        throw std::invalid_argument("BBox: non-finite coordinate");
    }
    if (!(x2 > x1) || !(y2 > y1)) {
        throw std::invalid_argument("BBox: degenerate box [" + std::to_string(x1) + ", " +
                                    std::to_string(y1) + ", " + std::to_string(x2) + ", " +
                                    std::to_string(y2) + "]");
    }
}

bool BBox::contains(const BBox& inner) const {
    return inner.x1_ >= x1_ && inner.y1_ >= y1_ && inner.x2_ <= x2_ && inner.y2_ <= y2_;
}

bool BBox::intersects(const BBox& other) const {
    return std::min(x2_, other.x2_) > std::max(x1_, other.x1_) &&
           std::min(y2_, other.y2_) > std::max(y1_, other.y1_);
}

Image::Image(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width(w), height(h), rgb(w * h * 3) {
    for (std::size_t i = 0; i < w * h; ++i) {
        rgb[3 * i] = r;
        rgb[3 * i + 1] = g;
        rgb[3 * i + 2] = b;
    }
}

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    // Order-independent sum keeps iou(a, b) == iou(b, a) bit-exactly.
    const double uni = std::min(a.area(), b.area()) + std::max(a.area(), b.area()) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

BBox union_box(const BBox& a, const BBox& b, double margin, Bounds bounds) {
    if (margin < 0.0) throw std::invalid_argument("union_box: negative margin");
    const double x1 = std::max(0.0, std::min(a.x1(), b.x1()) - margin);
    const double y1 = std::max(0.0, std::min(a.y1(), b.y1()) - margin);
    const double x2 = std::min(bounds.width, std::max(a.x2(), b.x2()) + margin);
    const double y2 = std::min(bounds.height, std::max(a.y2(), b.y2()) + margin);
    return BBox(x1, y1, x2, y2);
}

double context_margin(const BBox& a, const BBox& b, double min_pixels, double fraction) {
    const double w = std::max(a.x2(), b.x2()) - std::min(a.x1(), b.x1());
    const double h = std::max(a.y2(), b.y2()) - std::min(a.y1(), b.y1());
    return std::max(min_pixels, fraction * std::max(w, h));
}

std::vector<std::size_t> nms(const std::vector<ScoredBox>& candidates, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("nms: threshold must lie in (0, 1]");
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return candidates[i].score > candidates[j].score;
    });
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return iou(candidates[i].box, candidates[k].box) > iou_threshold;
        });
        if (!suppressed) kept.push_back(i);
    }
    return kept;
}

std::vector<std::size_t> nms_per_class(const std::vector<ScoredBox>& candidates,
                                       double iou_threshold) {
    std::vector<std::size_t> categories;
    for (const auto& c : candidates) categories.push_back(c.category);
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());

    std::vector<std::size_t> kept;
    for (std::size_t cat : categories) {
        std::vector<ScoredBox> group;
        std::vector<std::size_t> origin;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (candidates[i].category == cat) {
                group.push_back(candidates[i]);
                origin.push_back(i);
            }
        }
        for (std::size_t k : nms(group, iou_threshold)) kept.push_back(origin[k]);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

namespace {

std::vector<std::uint8_t> rasterize(const BBox& frame, const BBox& box, std::size_t s,
                                    const char* which) {
    if (!frame.intersects(box)) {
        throw std::invalid_argument(std::string("rasterize_dual_masks: ") + which +
                                    " box lies outside the frame");
    }
    std::vector<std::uint8_t> mask(s * s, 0);
    const double sx = frame.width() / static_cast<double>(s);
    const double sy = frame.height() / static_cast<double>(s);
    std::size_t filled = 0;
    for (std::size_t r = 0; r < s; ++r) {
        const double y = frame.y1() + (static_cast<double>(r) + 0.5) * sy;
        if (y < box.y1() || y >= box.y2()) continue;
        for (std::size_t c = 0; c < s; ++c) {
            const double x = frame.x1() + (static_cast<double>(c) + 0.5) * sx;
            if (x >= box.x1() && x < box.x2()) {
                mask[r * s + c] = 1;
                ++filled;
            }
        }
    }
    if (filled == 0) {
        throw std::invalid_argument(std::string("rasterize_dual_masks: ") + which +
                                    " box covers no pixel center at this resolution");
    }
    return mask;
}

}  // namespace

DualMask rasterize_dual_masks(const BBox& frame, const BBox& subject, const BBox& object,
                              std::size_t resolution) {
    if (resolution == 0) throw std::invalid_argument("rasterize_dual_masks: zero resolution");
    return DualMask{resolution, rasterize(frame, subject, resolution, "subject"),
                    rasterize(frame, object, resolution, "object")};
}

std::vector<double> crop_resize(const Image& image, const BBox& box, std::size_t resolution) {
    if (resolution == 0) throw std::invalid_argument("crop_resize: zero resolution");
    if (image.width == 0 || image.height == 0) throw std::invalid_argument("crop_resize: empty image");
    const std::size_t s = resolution;
    std::vector<double> out(s * s * 3);
    const double sx = box.width() / static_cast<double>(s);
    const double sy = box.height() / static_cast<double>(s);
    const double max_x = static_cast<double>(image.width - 1);
    const double max_y = static_cast<double>(image.height - 1);
    for (std::size_t r = 0; r < s; ++r) {
        // Pixel i is centered at i + 0.5, so subtract half a pixel to get a
        // sampling coordinate in index space.
        const double fy = std::clamp(box.y1() + (static_cast<double>(r) + 0.5) * sy - 0.5, 0.0, max_y);
        const auto y0 = static_cast<std::size_t>(std::floor(fy));
        const std::size_t y1 = std::min(y0 + 1, image.height - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t c = 0; c < s; ++c) {
            const double fx = std::clamp(box.x1() + (static_cast<double>(c) + 0.5) * sx - 0.5, 0.0, max_x);
            const auto x0 = static_cast<std::size_t>(std::floor(fx));
            const std::size_t x1 = std::min(x0 + 1, image.width - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const double top = (1.0 - wx) * image.at(y0, x0, ch) + wx * image.at(y0, x1, ch);
                const double bottom = (1.0 - wx) * image.at(y1, x0, ch) + wx * image.at(y1, x1, ch);
                out[(r * s + c) * 3 + ch] = (1.0 - wy) * top + wy * bottom;
            }
        }
    }
    return out;
}

ad::Tensor five_channel_input(const std::vector<double>& patch, const DualMask& masks) {
    const std::size_t s = masks.resolution;
    if (patch.size() != s * s * 3 || masks.subject.size() != s * s || masks.object.size() != s * s) {
        throw std::invalid_argument("five_channel_input: patch and masks disagree on resolution");
    }
    std::vector<double> values(s * s * 5);
    for (std::size_t p = 0; p < s * s; ++p) {
        for (std::size_t ch = 0; ch < 3; ++ch) values[p * 5 + ch] = patch[p * 3 + ch] / 255.0;
        values[p * 5 + 3] = masks.subject[p];
        values[p * 5 + 4] = masks.object[p];
    }
    return ad::Tensor({s, s, 5}, std::move(values));
}

}  // namespace silrel::geo
