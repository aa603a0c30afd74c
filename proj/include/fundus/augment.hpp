#pragma once

#include <cstdint>
#include <utility>

#include "fundus/raster.hpp"

namespace fundus {

struct AugmentConfig {
  std::uint64_t seed = 42;
  bool rotate = true;
  bool flip = true;
  bool brightness = true;
  bool contrast = true;
  double flip_probability = 0.5;
  /// brightness_delta ~ U[-max, +max] on the 8-bit scale
  double brightness_max_delta = 25.0;
  /// contrast_factor is log-uniform on [min, max]
  double contrast_min = 0.8;
  double contrast_max = 1.25;
};

struct AugmentationSample {
  double angle = 0.0;  // degrees, [0, 360)
  bool flip = false;
  double brightness_delta = 0.0;
  double contrast_factor = 1.0;

  friend bool operator==(const AugmentationSample&, const AugmentationSample&) = default;
};

/// Pure function of (config, index). Draw order is fixed (angle, flip,
/// brightness, contrast) and a disabled transform still consumes its draw.
AugmentationSample sample(const AugmentConfig& config, std::uint64_t index);
AugmentationSample sample(std::uint64_t seed, std::uint64_t index);

/// Counter-clockwise rotation about the image center; samples falling
/// outside the source are 0. Multiples of 90 degrees are exact pixel
/// permutations. Throws NonSquareInput.
GrayImage rotate(const GrayImage& img, double angle_degrees);
BinaryMask rotate(const BinaryMask& mask, double angle_degrees);

GrayImage flip_lr(const GrayImage& img);
BinaryMask flip_lr(const BinaryMask& mask);
RasterImage flip_lr(const RasterImage& img);

/// clamp(round(v + delta))
GrayImage adjust_brightness(const GrayImage& img, double delta);
/// clamp(round(mean + factor * (v - mean))), mean over the whole image.
GrayImage adjust_contrast(const GrayImage& img, double factor);

/// Geometric parameters go to both image and mask (flip, then rotate);
/// photometric ones to the image only (brightness, then contrast).
std::pair<GrayImage, BinaryMask> apply(const GrayImage& image, const BinaryMask& mask, const AugmentationSample& s);
GrayImage apply(const GrayImage& image, const AugmentationSample& s);

}  // namespace fundus
