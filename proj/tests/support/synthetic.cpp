#include "synthetic.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fundus/raster_io.hpp"

namespace synth {

namespace fs = std::filesystem;
using namespace fundus;

double gaussian(SplitMix64& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0, 1]
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

void stamp(BinaryMask& m, double cx, double cy, double r) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(m.width() - 1, static_cast<int>(std::ceil(cx + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(m.height() - 1, static_cast<int>(std::ceil(cy + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.at(x, y) = 1;
}

}  // namespace

Fundus make_fundus(const FundusSpec& spec) {
  SplitMix64 rng(spec.seed);
  Fundus f;
  f.disk = BinaryMask(spec.width, spec.height);
  f.vessels = BinaryMask(spec.width, spec.height);
  stamp(f.disk, spec.cx, spec.cy, spec.radius);

  int x0 = spec.width, y0 = spec.height, x1 = -1, y1 = -1;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x)
      if (f.disk.at(x, y)) x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  f.extent = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};

  for (int v = 0; v < spec.vessels; ++v) {
    double x = spec.cx + (rng.uniform() - 0.5) * spec.radius * 0.3;
    double y = spec.cy + (rng.uniform() - 0.5) * spec.radius * 0.3;
    double heading = rng.uniform() * 2.0 * std::numbers::pi;
    const double width = 0.8 + rng.uniform() * 2.0;
    for (int step = 0; step < static_cast<int>(spec.radius * 1.5); ++step) {
      heading += (rng.uniform() - 0.5) * 0.25;
      x += std::cos(heading);
      y += std::sin(heading);
      stamp(f.vessels, x, y, width);
    }
  }
  for (std::size_t i = 0; i < f.vessels.pixel_count(); ++i) f.vessels.data()[i] &= f.disk.data()[i];

  const double level = spec.intensity;
  const double red = std::min(255.0, level * 1.35), blue = level * 0.3;
  const double green = (level - 0.299 * red - 0.114 * blue) / 0.587;
  f.photo = RasterImage(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      double rgb[3] = {0.0, 0.0, 0.0};
      if (f.disk.at(x, y)) {
        const double shade = f.vessels.at(x, y) ? 0.55 : 1.0;
        rgb[0] = red * shade, rgb[1] = green * shade, rgb[2] = blue * shade;
      }
      for (int c = 0; c < 3; ++c) {
        const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * gaussian(rng) : 0.0;
        f.photo.at(x, y, c) = clamp_u8(rgb[c] + noise);
      }
    }
  }
  return f;
}

BinaryMask random_mask(SplitMix64& rng, int width, int height, double density) {
  BinaryMask m(width, height);
  for (auto& v : m.data()) v = rng.uniform() < density;
  return m;
}

GrayImage random_gray(SplitMix64& rng, int width, int height) {
  GrayImage g(width, height);
  for (auto& v : g.data()) v = static_cast<std::uint8_t>(rng.below(256));
  return g;
}

BinaryMask random_blobs(SplitMix64& rng, int width, int height) {
  BinaryMask m(width, height);
  const int blobs = 1 + static_cast<int>(rng.below(5));
  for (int b = 0; b < blobs; ++b) {
    const double cx = rng.uniform() * width, cy = rng.uniform() * height;
    const double r = 1.0 + rng.uniform() * std::max(width, height) * 0.4;
    if (rng.below(2)) {
      stamp(m, cx, cy, r);
    } else {
      for (int y = std::max(0, int(cy - r)); y < std::min(height, int(cy + r)); ++y)
        for (int x = std::max(0, int(cx - r / 2)); x < std::min(width, int(cx + r / 2)); ++x) m.at(x, y) = 1;
    }
  }
  // Salt and pepper so the majority filter has something to remove.
  for (auto& v : m.data())
    if (rng.uniform() < 0.05) v ^= 1;
  return m;
}

namespace {

void write_png(const RasterImage& img, const fs::path& path) {
  fs::create_directories(path.parent_path());
  write_raster(img, path, RasterFormat::Png);
}

void write_png(const BinaryMask& mask, const fs::path& path) {
  fs::create_directories(path.parent_path());
  write_raster(mask, path, RasterFormat::Png);
}

Fundus drive_like(SplitMix64& rng, int width, int height) {
  FundusSpec spec;
  spec.width = width;
  spec.height = height;
  spec.radius = 0.46 * std::min(width, height) + rng.uniform() * 10.0;
  spec.cx = width / 2.0 + (rng.uniform() - 0.5) * 12.0;
  spec.cy = height / 2.0 + (rng.uniform() - 0.5) * 12.0;
  spec.intensity = static_cast<std::uint8_t>(150 + rng.below(60));
  spec.noise_sigma = 4.0;
  spec.vessels = 6 + static_cast<int>(rng.below(6));
  spec.seed = rng.next();
  return make_fundus(spec);
}

// A second observer that disagrees a little: drops thin vessel borders.
BinaryMask second_observer(const BinaryMask& first) { return erode(first, 1); }

std::string two_digits(int n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", n);
  return buf;
}

}  // namespace

void write_drive_tree(const fs::path& root, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int n = 1; n <= 40; ++n) {
    const bool train = n > 20;
    const std::string id = two_digits(n), part = train ? "training" : "test";
    const Fundus f = drive_like(rng, 565, 584);
    const fs::path base = root / part;
    write_png(f.photo, base / "images" / (id + "_" + part + ".png"));
    write_png(f.vessels, base / "1st_manual" / (id + "_manual1.png"));
    if (!train) write_png(second_observer(f.vessels), base / "2nd_manual" / (id + "_manual2.png"));
    write_png(f.disk, base / "mask" / (id + "_" + part + "_mask.png"));
  }
}

void write_stare_tree(const fs::path& root, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int n = 1; n <= count; ++n) {
    char id[16];
    std::snprintf(id, sizeof id, "im%04d", n);
    const Fundus f = drive_like(rng, 700, 605);
    write_png(f.photo, root / "stare-images" / (std::string(id) + ".png"));
    write_png(f.vessels, root / "labels-ah" / (std::string(id) + ".ah.png"));
    write_png(second_observer(f.vessels), root / "labels-vk" / (std::string(id) + ".vk.png"));
  }
}

void write_chase_tree(const fs::path& root, int count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (int n = 1; n <= count; ++n) {
    for (const char eye : {'L', 'R'}) {
      const std::string id = "Image_" + two_digits(n) + eye;
      const Fundus f = drive_like(rng, 500, 480);
      write_png(f.photo, root / (id + ".png"));
      write_png(f.vessels, root / (id + "_1stHO.png"));
      write_png(second_observer(f.vessels), root / (id + "_2ndHO.png"));
    }
  }
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("fundus-test-" + tag + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace synth
