#include "fundus/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fundus/rng.hpp"

namespace fundus {
namespace {

std::uint8_t round_to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

struct Rotation {
  double cos = 1.0;
  double sin = 0.0;
};

Rotation rotation_for(double angle_degrees) {
  double a = std::fmod(angle_degrees, 360.0);
  if (a < 0.0) a += 360.0;
  if (a == 0.0) return {1.0, 0.0};
  if (a == 90.0) return {0.0, 1.0};
  if (a == 180.0) return {-1.0, 0.0};
  if (a == 270.0) return {0.0, -1.0};
  const double rad = a * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

template <typename Img>
void require_square(const Img& img) {
  if (img.width() != img.height())
    throw Error(ErrorCode::NonSquareInput, "rotation expects a square image, got " + std::to_string(img.width()) + "x" +
                                               std::to_string(img.height()));
}

// Inverse mapping: destination (x, y) reads the source at
// c + [[cos, -sin], [sin, cos]] (p - c), with y pointing down.
template <typename Sampler, typename Img>
Img rotate_with(const Img& img, double angle_degrees, Sampler&& sampler) {
  require_square(img);
  const Rotation r = rotation_for(angle_degrees);
  const int n = img.width();
  const double c = (n - 1) / 2.0;
  Img out(n, n);
  for (int y = 0; y < n; ++y) {
    const double dy = y - c;
    auto dst = out.row(y);
    for (int x = 0; x < n; ++x) {
      const double dx = x - c;
      dst[x] = sampler(c + r.cos * dx - r.sin * dy, c + r.sin * dx + r.cos * dy);
    }
  }
  return out;
}

template <typename Img>
Img flip_impl(const Img& img) {
  constexpr int ch = Img::channels;
  Img out(img.width(), img.height());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    auto src = img.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < ch; ++k) dst[x * ch + k] = src[(w - 1 - x) * ch + k];
  }
  return out;
}

}  // namespace

AugmentationSample sample(const AugmentConfig& config, std::uint64_t index) {
  auto rng = SplitMix64::stream(config.seed, index);
  const double u_angle = rng.uniform();
  const double u_flip = rng.uniform();
  const double u_brightness = rng.uniform();
  const double u_contrast = rng.uniform();

  AugmentationSample s;
  if (config.rotate) s.angle = 360.0 * u_angle;
  if (config.flip) s.flip = u_flip < config.flip_probability;
  if (config.brightness) s.brightness_delta = config.brightness_max_delta * (2.0 * u_brightness - 1.0);
  if (config.contrast) {
    const double lo = std::log(config.contrast_min), hi = std::log(config.contrast_max);
    s.contrast_factor = std::exp(lo + (hi - lo) * u_contrast);
  }
  return s;
}

AugmentationSample sample(std::uint64_t seed, std::uint64_t index) {
  AugmentConfig config;
  config.seed = seed;
  return sample(config, index);
}

GrayImage rotate(const GrayImage& img, double angle_degrees) {
  const int n = img.width();
  auto fetch = [&](int x, int y) -> double { return (x < 0 || y < 0 || x >= n || y >= n) ? 0.0 : img.at(x, y); };
  return rotate_with(img, angle_degrees, [&](double sx, double sy) {
    const double fx = std::floor(sx), fy = std::floor(sy);
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const double ax = sx - fx, ay = sy - fy;
    const double top = fetch(x0, y0) * (1.0 - ax) + fetch(x0 + 1, y0) * ax;
    const double bottom = fetch(x0, y0 + 1) * (1.0 - ax) + fetch(x0 + 1, y0 + 1) * ax;
    return round_to_u8(top * (1.0 - ay) + bottom * ay);
  });
}

BinaryMask rotate(const BinaryMask& mask, double angle_degrees) {
  const int n = mask.width();
  return rotate_with(mask, angle_degrees, [&](double sx, double sy) -> std::uint8_t {
    const int x = static_cast<int>(std::floor(sx + 0.5)), y = static_cast<int>(std::floor(sy + 0.5));
    return (x < 0 || y < 0 || x >= n || y >= n) ? 0 : mask.at(x, y);
  });
}

GrayImage flip_lr(const GrayImage& img) { return flip_impl(img); }
BinaryMask flip_lr(const BinaryMask& mask) { return flip_impl(mask); }
RasterImage flip_lr(const RasterImage& img) { return flip_impl(img); }

GrayImage adjust_brightness(const GrayImage& img, double delta) {
  GrayImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = round_to_u8(src[i] + delta);
  return out;
}

GrayImage adjust_contrast(const GrayImage& img, double factor) {
  std::uint64_t sum = 0;
  for (auto v : img.data()) sum += v;
  const double mean = static_cast<double>(sum) / static_cast<double>(img.pixel_count());
  GrayImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = round_to_u8(mean + factor * (src[i] - mean));
  return out;
}

GrayImage apply(const GrayImage& image, const AugmentationSample& s) {
  GrayImage out = s.flip ? flip_lr(image) : image;
  if (s.angle != 0.0) out = rotate(out, s.angle);
  if (s.brightness_delta != 0.0) out = adjust_brightness(out, s.brightness_delta);
  if (s.contrast_factor != 1.0) out = adjust_contrast(out, s.contrast_factor);
  return out;
}

std::pair<GrayImage, BinaryMask> apply(const GrayImage& image, const BinaryMask& mask, const AugmentationSample& s) {
  if (image.size() != mask.size()) throw Error(ErrorCode::ShapeMismatch, "image and mask shapes differ");
  BinaryMask m = s.flip ? flip_lr(mask) : mask;
  if (s.angle != 0.0) m = rotate(m, s.angle);
  return {apply(image, s), std::move(m)};
}

}  // namespace fundus
