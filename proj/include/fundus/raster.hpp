#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fundus/error.hpp"

namespace fundus {

struct Size {
  int width = 0;
  int height = 0;

  friend bool operator==(const Size&, const Size&) = default;
};

/// Row-major pixel grid with `Channels` interleaved samples per pixel.
/// `Kind` only distinguishes otherwise identical layouts (gray vs. mask).
/// A default-constructed image is empty (0x0); any other image is at least 1x1.
template <typename Sample, int Channels, typename Kind>
class Image {
 public:
  using sample_type = Sample;
  static constexpr int channels = Channels;

  Image() = default;

  Image(int width, int height, Sample fill = Sample{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  Image(int width, int height, std::vector<Sample> data)
      : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * height * Channels)
      throw Error(ErrorCode::ShapeMismatch, "sample count does not match width*height*channels");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Size size() const noexcept { return {width_, height_}; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  std::span<const Sample> data() const noexcept { return data_; }
  std::span<Sample> data() noexcept { return data_; }
  const std::vector<Sample>& samples() const noexcept { return data_; }

  Sample& at(int x, int y, int c = 0) noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }
  const Sample& at(int x, int y, int c = 0) const noexcept {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * Channels + c];
  }

  std::span<Sample> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * Channels,
            static_cast<std::size_t>(width_) * Channels};
  }
  std::span<const Sample> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * Channels,
            static_cast<std::size_t>(width_) * Channels};
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1)
      throw Error(ErrorCode::Precondition, "image dimensions must be at least 1x1");
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Sample> data_;
};

struct RgbKind {};
struct GrayKind {};
struct MaskKind {};
struct ProbabilityKind {};

using RasterImage = Image<std::uint8_t, 3, RgbKind>;
using GrayImage = Image<std::uint8_t, 1, GrayKind>;
/// Samples are restricted to {0, 1}.
using BinaryMask = Image<std::uint8_t, 1, MaskKind>;
/// Samples are finite and within [0, 1].
using ProbabilityMap = Image<float, 1, ProbabilityKind>;

/// BT.601 luma, rounded half-up.
GrayImage to_grayscale(const RasterImage& img);
RasterImage gray_to_rgb(const GrayImage& img);

/// Mask from an 8-bit label image: samples above 127 are foreground.
BinaryMask mask_from_gray(const GrayImage& img);
/// Mask rendered with {0, 255} samples.
GrayImage mask_to_gray(const BinaryMask& mask);

BinaryMask make_mask(int width, int height, std::vector<std::uint8_t> bits);
ProbabilityMap make_probability_map(int width, int height, std::vector<float> values);

/// Throws OutOfRange / NonFiniteValue on a violated invariant.
void validate(const BinaryMask& mask);
void validate(const ProbabilityMap& map);

ProbabilityMap mask_to_probability(const BinaryMask& mask);

}  // namespace fundus
