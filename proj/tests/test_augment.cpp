#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fundus/augment.hpp"
#include "synthetic.hpp"

using namespace fundus;

namespace {

BinaryMask centered_disk(int n, double r) {
  BinaryMask m(n, n);
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) m.at(x, y) = (x - c) * (x - c) + (y - c) * (y - c) <= r * r;
  return m;
}

std::size_t area(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.data()) n += v;
  return n;
}

// Smooth blob that fades to zero well inside the frame.
GrayImage smooth_blob(int n) {
  GrayImage g(n, n);
  const double c = (n - 1) / 2.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double dx = (x - c) / n, dy = (y - c) / n;
      const double v = 230.0 * std::exp(-20.0 * (dx * dx + dy * dy)) * (0.8 + 0.2 * std::cos(6.0 * dx));
      g.at(x, y) = static_cast<std::uint8_t>(std::floor(v));
    }
  return g;
}

}  // namespace

TEST_CASE("rotation") {
  SplitMix64 rng(2);
  const auto g = synth::random_gray(rng, 33, 33);
  CHECK(rotate(g, 0.0) == g);
  CHECK(rotate(rotate(rotate(rotate(g, 90.0), 90.0), 90.0), 90.0) == g);
  const auto m = synth::random_mask(rng, 32, 32, 0.5);
  CHECK(rotate(rotate(rotate(rotate(m, 90.0), 90.0), 90.0), 90.0) == m);
  CHECK(rotate(m, 360.0) == m);
  CHECK(rotate(m, -90.0) == rotate(m, 270.0));

  SUBCASE("positive angles turn counter-clockwise on screen") {
    BinaryMask right(5, 5);
    right.at(4, 2) = 1;
    BinaryMask top(5, 5);
    top.at(2, 0) = 1;
    CHECK(rotate(right, 90.0) == top);
  }
  SUBCASE("disk area is conserved at 45 degrees") {
    const auto disk = centered_disk(301, 110.0);
    const double before = static_cast<double>(area(disk));
    const auto turned = rotate(disk, 45.0);
    CHECK(std::abs(area(turned) / before - 1.0) <= 0.01);
    for (auto v : turned.data()) REQUIRE(v <= 1);
  }
  SUBCASE("rotate then rotate back is close to identity") {
    const auto blob = smooth_blob(128);
    for (double angle : {17.0, 45.0, 133.7, 250.0}) {
      const auto back = rotate(rotate(blob, angle), -angle);
      double diff = 0.0;
      for (std::size_t i = 0; i < blob.pixel_count(); ++i) diff += std::abs(blob.data()[i] - back.data()[i]);
      CHECK(diff / blob.pixel_count() < 2.0);
    }
  }
  CHECK_THROWS_AS(rotate(GrayImage(4, 5), 10.0), Error);
}

TEST_CASE("flip") {
  SplitMix64 rng(3);
  const auto g = synth::random_gray(rng, 17, 9);
  CHECK(flip_lr(flip_lr(g)) == g);
  GrayImage dot(7, 4);
  dot.at(1, 2) = 200;
  CHECK(flip_lr(dot).at(5, 2) == 200);
  GrayImage symmetric(6, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) symmetric.at(x, y) = symmetric.at(5 - x, y) = static_cast<std::uint8_t>(x * 40 + y);
  CHECK(flip_lr(symmetric) == symmetric);
}

TEST_CASE("brightness and contrast") {
  SplitMix64 rng(4);
  const auto g = synth::random_gray(rng, 20, 20);
  CHECK(adjust_brightness(g, 0.0) == g);
  CHECK(adjust_contrast(g, 1.0) == g);
  CHECK(adjust_contrast(GrayImage(9, 9, 77), 1.25) == GrayImage(9, 9, 77));
  CHECK(adjust_brightness(GrayImage(2, 2, 250), 25.0) == GrayImage(2, 2, 255));

  GrayImage two(2, 1);
  two.at(0, 0) = 50;
  two.at(1, 0) = 150;
  const auto c = adjust_contrast(two, 1.25);
  CHECK(c.at(0, 0) == 38);
  CHECK(c.at(1, 0) == 163);
}

TEST_CASE("sampling") {
  CHECK(sample(42, 7) == sample(42, 7));
  CHECK_FALSE(sample(42, 7) == sample(43, 7));

  AugmentConfig config;
  std::set<std::tuple<double, double, double>> seen;
  std::size_t flips = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto s = sample(config, i);
    REQUIRE(s.angle >= 0.0);
    REQUIRE(s.angle < 360.0);
    REQUIRE(std::abs(s.brightness_delta) <= config.brightness_max_delta);
    REQUIRE(s.contrast_factor >= config.contrast_min);
    REQUIRE(s.contrast_factor <= config.contrast_max);
    seen.insert({s.angle, s.brightness_delta, s.contrast_factor});
    flips += s.flip;
  }
  CHECK(seen.size() == 10000);
  CHECK(std::abs(flips / 10000.0 - 0.5) < 0.03);

  SUBCASE("angles are uniform (Kolmogorov-Smirnov)") {
    const std::size_t n = 100000;
    std::vector<double> angles(n);
    for (std::size_t i = 0; i < n; ++i) angles[i] = sample(config, i).angle / 360.0;
    std::sort(angles.begin(), angles.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      d = std::max({d, (i + 1.0) / n - angles[i], angles[i] - static_cast<double>(i) / n});
    // Critical value at alpha = 0.001.
    CHECK(d < 1.95 / std::sqrt(static_cast<double>(n)));
  }
  SUBCASE("disabled transforms keep their draw slot") {
    AugmentConfig off = config;
    off.rotate = false;
    off.flip = false;
    const auto a = sample(config, 99), b = sample(off, 99);
    CHECK(b.angle == 0.0);
    CHECK_FALSE(b.flip);
    CHECK(a.brightness_delta == b.brightness_delta);
    CHECK(a.contrast_factor == b.contrast_factor);
  }
}

TEST_CASE("paired application") {
  SplitMix64 rng(9);
  const auto image = smooth_blob(64);
  const auto mask = synth::random_blobs(rng, 64, 64);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto s = sample(42, i);
    const auto [img, m] = apply(image, mask, s);
    BinaryMask expected_mask = s.flip ? flip_lr(mask) : mask;
    expected_mask = rotate(expected_mask, s.angle);
    CHECK(m == expected_mask);
    GrayImage expected = s.flip ? flip_lr(image) : image;
    expected = adjust_contrast(adjust_brightness(rotate(expected, s.angle), s.brightness_delta), s.contrast_factor);
    CHECK(img == expected);
    CHECK(apply(image, s) == img);
  }
  CHECK_THROWS_AS(apply(GrayImage(8, 8), BinaryMask(9, 9), sample(1, 1)), Error);
}
