#include "fundus/locator.hpp"

#include <algorithm>
#include <vector>

namespace fundus {
namespace {

// One pass of the 3x3 min (erode) or max (dilate) filter, done separably.
// Out-of-bounds neighbours are skipped, which realizes both border rules.
template <bool Erode>
BinaryMask morph_pass(const BinaryMask& src) {
  const int w = src.width(), h = src.height();
  auto combine = [](std::uint8_t a, std::uint8_t b) -> std::uint8_t {
    return Erode ? std::min(a, b) : std::max(a, b);
  };

  BinaryMask horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    auto in = src.row(y);
    auto out = horizontal.row(y);
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = in[x];
      if (x > 0) v = combine(v, in[x - 1]);
      if (x + 1 < w) v = combine(v, in[x + 1]);
      out[x] = v;
    }
  }

  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    auto mid = horizontal.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = mid[x];
      if (y > 0) v = combine(v, horizontal.at(x, y - 1));
      if (y + 1 < h) v = combine(v, horizontal.at(x, y + 1));
      dst[x] = v;
    }
  }
  return out;
}

template <bool Erode>
BinaryMask morph(const BinaryMask& mask, int iterations) {
  if (iterations < 0) throw Error(ErrorCode::Precondition, "iterations must be non-negative");
  BinaryMask current = mask;
  for (int i = 0; i < iterations; ++i) current = morph_pass<Erode>(current);
  return current;
}

}  // namespace

BinaryMask threshold_mean_third(const GrayImage& gray) {
  std::uint64_t sum = 0;
  for (auto v : gray.data()) sum += v;
  const double threshold = static_cast<double>(sum) / static_cast<double>(gray.pixel_count()) / 3.0;

  BinaryMask mask(gray.width(), gray.height());
  auto src = gray.data();
  auto dst = mask.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<double>(src[i]) > threshold ? 1 : 0;
  return mask;
}

BinaryMask median_blur(const BinaryMask& mask, int ks) {
  if (ks < 3 || ks % 2 == 0)
    throw Error(ErrorCode::EvenKernel, "median kernel must be odd and >= 3, got " + std::to_string(ks));
  const int w = mask.width(), h = mask.height();
  const int r = ks / 2;
  const int majority = ks * ks / 2;  // foreground iff count > majority
  auto clamp_x = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clamp_y = [h](int y) { return std::clamp(y, 0, h - 1); };

  // column_count[x] = foreground count in rows [y - r, y + r] (replicated) of column x.
  std::vector<int> column_count(w, 0);
  for (int dy = -r; dy <= r; ++dy) {
    auto row = mask.row(clamp_y(dy));
    for (int x = 0; x < w; ++x) column_count[x] += row[x];
  }

  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    if (y > 0) {
      auto incoming = mask.row(clamp_y(y + r));
      auto outgoing = mask.row(clamp_y(y - r - 1));
      for (int x = 0; x < w; ++x) column_count[x] += incoming[x] - outgoing[x];
    }
    int window = 0;
    for (int dx = -r; dx <= r; ++dx) window += column_count[clamp_x(dx)];
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      if (x > 0) window += column_count[clamp_x(x + r)] - column_count[clamp_x(x - r - 1)];
      dst[x] = window > majority ? 1 : 0;
    }
  }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int iterations) { return morph<true>(mask, iterations); }

BinaryMask dilate(const BinaryMask& mask, int iterations) { return morph<false>(mask, iterations); }

BoundingBox largest_component_bbox(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::uint8_t> visited(mask.pixel_count(), 0);
  std::vector<int> stack;

  std::size_t best_area = 0;
  BoundingBox best;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      const std::size_t seed = static_cast<std::size_t>(sy) * w + sx;
      if (!mask.data()[seed] || visited[seed]) continue;

      std::size_t area = 0;
      int min_x = sx, max_x = sx, min_y = sy, max_y = sy;
      visited[seed] = 1;
      stack.push_back(static_cast<int>(seed));
      while (!stack.empty()) {
        const int index = stack.back();
        stack.pop_back();
        const int x = index % w, y = index / w;
        ++area;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
        for (int ny = std::max(0, y - 1); ny <= std::min(h - 1, y + 1); ++ny) {
          for (int nx = std::max(0, x - 1); nx <= std::min(w - 1, x + 1); ++nx) {
            const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
            if (mask.data()[n] && !visited[n]) {
              visited[n] = 1;
              stack.push_back(static_cast<int>(n));
            }
          }
        }
      }
      if (area > best_area) {
        best_area = area;
        best = {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
      }
    }
  }
  if (best_area == 0) throw Error(ErrorCode::EmptyMask, "mask has no foreground pixels");
  return best;
}

BinaryMask retina_mask(const RasterImage& photo) {
  return dilate(erode(median_blur(threshold_mean_third(to_grayscale(photo)), 25), 2), 2);
}

BoundingBox locate_retina(const RasterImage& photo) {
  try {
    return largest_component_bbox(retina_mask(photo));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyMask) throw;
    throw Error(ErrorCode::NoRetinaFound, "no bright retina region found in photo");
  }
}

}  // namespace fundus
