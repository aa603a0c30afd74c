#pragma once

#include "fundus/raster.hpp"

namespace fundus {

/// Inclusive top-left corner plus extent, in photo pixel coordinates.
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  int x1() const noexcept { return x0 + width - 1; }
  int y1() const noexcept { return y0 + height - 1; }
  bool within(Size image) const noexcept {
    return width >= 1 && height >= 1 && x0 >= 0 && y0 >= 0 && x0 + width <= image.width &&
           y0 + height <= image.height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Foreground where gray > mean(gray) / 3.
BinaryMask threshold_mean_third(const GrayImage& gray);

/// Windowed majority over a ks x ks neighbourhood with edge replication,
/// which is exactly the median of a binary image. O(width * height)
/// regardless of ks. Throws EvenKernel unless ks is odd and >= 3.
BinaryMask median_blur(const BinaryMask& mask, int ks = 25);

/// 3x3 rectangular structuring element. Pixels outside the image count as
/// foreground for erosion and background for dilation, so full and empty
/// masks are fixed points.
BinaryMask erode(const BinaryMask& mask, int iterations = 2);
BinaryMask dilate(const BinaryMask& mask, int iterations = 2);

/// Tight box around the largest 8-connected component. Equal areas resolve
/// to the component reached first in row-major order. Throws EmptyMask.
BoundingBox largest_component_bbox(const BinaryMask& mask);

/// threshold -> median(25) -> erode(2) -> dilate(2). Doubles as the
/// synthesized field-of-view mask for datasets that ship none.
BinaryMask retina_mask(const RasterImage& photo);

/// Throws NoRetinaFound when the cleaned mask is empty.
BoundingBox locate_retina(const RasterImage& photo);

}  // namespace fundus
