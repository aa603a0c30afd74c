#pragma once

// Brute-force reference implementations. Each one follows the textbook
// definition directly and shares no code with the library kernels.

#include <cstdint>
#include <span>
#include <vector>

#include "fundus/locator.hpp"
#include "fundus/raster.hpp"

namespace oracle {

using fundus::BinaryMask;
using fundus::GrayImage;

/// Sorts every ks x ks window (edge-replicated) and takes the middle element.
BinaryMask median(const BinaryMask& mask, int ks);

/// Per-pixel 3x3 scan; out-of-bounds reads as 1 for erosion, 0 for dilation.
BinaryMask erode(const BinaryMask& mask, int iterations);
BinaryMask dilate(const BinaryMask& mask, int iterations);

/// Tent-kernel sum over every source pixel at the half-pixel-center position.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);
BinaryMask resize_nearest(const BinaryMask& mask, int out_w, int out_h);

/// Global histogram equalization: round(255 * #{pixels <= v} / N).
GrayImage global_equalize(const GrayImage& img);

/// Iterative minimum-label propagation over 8-neighbourhoods.
fundus::BoundingBox largest_component_bbox(const BinaryMask& mask);

/// Pairwise Mann-Whitney count.
double auc(std::span<const std::uint8_t> labels, std::span<const float> scores);

struct Loss {
  long double dice;
  long double bce;
  long double total;
};
/// Term-by-term evaluation in long double.
Loss loss(std::span<const std::uint8_t> y, std::span<const float> yhat, long double eps = 1e-7L);

}  // namespace oracle
