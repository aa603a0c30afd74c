#include "fundus/raster.hpp"

#include <cmath>
#include <string>

namespace fundus {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnsupportedFormat: return "unsupported-format";
    case ErrorCode::CorruptFile: return "corrupt-file";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::NonFiniteValue: return "non-finite-value";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::EvenKernel: return "even-kernel";
    case ErrorCode::EmptyMask: return "empty-mask";
    case ErrorCode::NoRetinaFound: return "no-retina-found";
    case ErrorCode::BboxOutOfBounds: return "bbox-out-of-bounds";
    case ErrorCode::ImageSmallerThanGrid: return "image-smaller-than-grid";
    case ErrorCode::NonSquareInput: return "non-square-input";
    case ErrorCode::DegenerateSingleClass: return "degenerate-single-class";
    case ErrorCode::MissingPrediction: return "missing-prediction";
    case ErrorCode::LayoutMismatch: return "layout-mismatch";
    case ErrorCode::UnknownKind: return "unknown-kind";
    case ErrorCode::KTooLarge: return "k-too-large";
    case ErrorCode::InvalidConfig: return "invalid-config";
  }
  return "unknown";
}

GrayImage to_grayscale(const RasterImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  // Integer form of floor(0.299 R + 0.587 G + 0.114 B + 0.5).
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const std::uint32_t r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    const std::uint32_t weighted = 299 * r + 587 * g + 114 * b;
    dst[i] = static_cast<std::uint8_t>((weighted + 500) / 1000);
  }
  return out;
}

RasterImage gray_to_rgb(const GrayImage& img) {
  RasterImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

BinaryMask mask_from_gray(const GrayImage& img) {
  BinaryMask out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 127 ? 1 : 0;
  return out;
}

GrayImage mask_to_gray(const BinaryMask& mask) {
  GrayImage out(mask.width(), mask.height());
  auto src = mask.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  return out;
}

BinaryMask make_mask(int width, int height, std::vector<std::uint8_t> bits) {
  BinaryMask mask(width, height, std::move(bits));
  validate(mask);
  return mask;
}

ProbabilityMap make_probability_map(int width, int height, std::vector<float> values) {
  ProbabilityMap map(width, height, std::move(values));
  validate(map);
  return map;
}

void validate(const BinaryMask& mask) {
  for (auto v : mask.data())
    if (v > 1) throw Error(ErrorCode::OutOfRange, "mask sample outside {0,1}: " + std::to_string(v));
}

void validate(const ProbabilityMap& map) {
  for (auto v : map.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "probability map contains NaN/Inf");
    if (v < 0.0f || v > 1.0f)
      throw Error(ErrorCode::OutOfRange, "probability outside [0,1]: " + std::to_string(v));
  }
}

ProbabilityMap mask_to_probability(const BinaryMask& mask) {
  ProbabilityMap out(mask.width(), mask.height());
  auto src = mask.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 1.0f : 0.0f;
  return out;
}

}  // namespace fundus
