#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "fundus/locator.hpp"
#include "fundus/raster.hpp"

namespace fundus {

inline constexpr int kStandardSize = 1024;
inline constexpr const char* kPipelineVersion = "fundus-forge/1.0.0";

struct ClaheParams {
  /// Multiple of the uniform bin height (tile_pixels / 256). Infinity disables clipping.
  double clip_limit = 2.0;
  int tiles_x = 8;
  int tiles_y = 8;

  static ClaheParams unclipped(int tiles_x = 1, int tiles_y = 1) {
    return {std::numeric_limits<double>::infinity(), tiles_x, tiles_y};
  }
};

struct StandardizeOptions {
  ClaheParams clahe;
  int size = kStandardSize;
  /// Equalize the cropped square before resizing (default) or after.
  bool clahe_before_resize = true;
};

/// Where the retina square sits on the padded canvas.
struct SquarePlacement {
  int side = 0;
  int offset_x = 0;  // zero columns on the left
  int offset_y = 0;  // zero rows on the top
};

/// Odd padding differences put the extra zero row/column at the bottom/right.
SquarePlacement square_placement(const BoundingBox& bbox);

GrayImage crop(const GrayImage& img, const BoundingBox& bbox);
RasterImage crop(const RasterImage& img, const BoundingBox& bbox);
BinaryMask crop(const BinaryMask& img, const BoundingBox& bbox);

/// Crop to bbox, then center on a zero-filled square of side max(w, h).
/// Throws BboxOutOfBounds.
GrayImage crop_pad_square(const GrayImage& img, const BoundingBox& bbox);
RasterImage crop_pad_square(const RasterImage& img, const BoundingBox& bbox);
BinaryMask crop_pad_square(const BinaryMask& img, const BoundingBox& bbox);

using ClaheLut = std::array<std::uint8_t, 256>;

/// Per-tile equalization tables in row-major tile order. Tile i along an axis
/// of length n covers [i*n/tiles, (i+1)*n/tiles).
std::vector<ClaheLut> clahe_tile_luts(const GrayImage& gray, const ClaheParams& params);

/// Contrast-limited adaptive histogram equalization with bilinear blending
/// between tile mappings. Throws ImageSmallerThanGrid / Precondition.
GrayImage clahe(const GrayImage& gray, const ClaheParams& params = {});

/// Half-pixel centers: src = (dst + 0.5) * in / out - 0.5, clamped to the
/// image; results rounded half-up.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);
RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);
/// src = floor((dst + 0.5) * in / out).
BinaryMask resize_nearest(const BinaryMask& mask, int out_w, int out_h);
GrayImage resize_nearest(const GrayImage& img, int out_w, int out_h);

struct Provenance {
  std::string source;
  BoundingBox bbox;
  ClaheParams clahe;
  int size = kStandardSize;
  bool clahe_before_resize = true;
  std::string version = kPipelineVersion;
};

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);
/// Problems found in a provenance sidecar; empty when it conforms.
std::vector<std::string> validate_provenance_json(const nlohmann::json& j);

struct StandardizedImage {
  GrayImage image;
  Provenance provenance;
};

/// locate -> crop/pad square -> grayscale -> CLAHE -> bilinear resize.
/// Propagates NoRetinaFound.
StandardizedImage standardize(const RasterImage& photo, const StandardizeOptions& options = {},
                              const std::string& source = {});

/// Same geometry as standardize, for label/FOV masks. Throws ShapeMismatch
/// when the label does not have the source photo's shape.
BinaryMask standardize_label(const BinaryMask& label, const BoundingBox& bbox, Size source_size,
                             int size = kStandardSize);

}  // namespace fundus
