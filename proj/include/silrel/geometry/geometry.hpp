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
#include <cstdint>
#include <vector>

#include "silrel/autodiff/tensor.hpp"

namespace silrel::geo {

/// Axis-aligned box [x1, x2) x [y1, y2) in pixel coordinates, origin top-left,
/// y growing downward. Construction enforces x2 > x1, y2 > y1 and finiteness.
class BBox {
public:
    BBox(double x1, double y1, double x2, double y2);

    double x1() const { return x1_; }
    double y1() const { return y1_; }
    double x2() const { return x2_; }
    double y2() const { return y2_; }
    double width() const { return x2_ - x1_; }
    double height() const { return y2_ - y1_; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x1_ + x2_); }
    double center_y() const { return 0.5 * (y1_ + y2_); }

    bool contains(const BBox& inner) const;
    bool intersects(const BBox& other) const;

    friend bool operator==(const BBox&, const BBox&) = default;

private:
    double x1_;
    double y1_;
    double x2_;
    double y2_;
};

struct ScoredBox {
    BBox box;
    std::size_t category = 0;
    double score = 1.0;  // in [0, 1]
};

/// Image extent used for clamping.
struct Bounds {
    double width = 0.0;
    double height = 0.0;
};

/// Packed 8-bit RGB raster, row-major H x W x 3.
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
        return rgb[(y * width + x) * 3 + c];
    }
    Bounds bounds() const { return {static_cast<double>(width), static_cast<double>(height)}; }
    friend bool operator==(const Image&, const Image&) = default;
};

/// Area of the intersection over area of the union, 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

/// Smallest box containing a and b, grown by `margin` on every side and
/// clamped to [0, width] x [0, height].
BBox union_box(const BBox& a, const BBox& b, double margin, Bounds bounds);

/// Context margin for appearance crops: max(4 px, 5% of the larger side of
/// the tight union box).
double context_margin(const BBox& a, const BBox& b, double min_pixels = 4.0,
                      double fraction = 0.05);

/// Greedy NMS over one class. Returns indices into `candidates` in keep order
/// (descending score, ties by lower index). A box is suppressed when its IoU
/// with an already kept box is strictly greater than `iou_threshold`.
std::vector<std::size_t> nms(const std::vector<ScoredBox>& candidates, double iou_threshold);

/// NMS run independently per category; kept indices returned in ascending
/// input order.
std::vector<std::size_t> nms_per_class(const std::vector<ScoredBox>& candidates,
                                       double iou_threshold);

/// Subject and object masks, each S x S, 1 where the pixel center falls
/// inside the box mapped into the frame.
struct DualMask {
    std::size_t resolution = 0;
    std::vector<std::uint8_t> subject;
    std::vector<std::uint8_t> object;
};

DualMask rasterize_dual_masks(const BBox& frame, const BBox& subject, const BBox& object,
                              std::size_t resolution);

/// Bilinear resample of `box` onto an S x S x 3 grid (values in 0..255).
/// Sample (r, c) sits at the center of output cell (r, c) mapped into image
/// coordinates; lookups outside the raster clamp to the edge.
std::vector<double> crop_resize(const Image& image, const BBox& box, std::size_t resolution);

/// S x S x 5 tensor: RGB / 255 in channels 0-2, subject mask in 3, object
/// mask in 4.
ad::Tensor five_channel_input(const std::vector<double>& patch, const DualMask& masks);

}  // namespace silrel::geo
