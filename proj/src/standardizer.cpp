#include "fundus/standardizer.hpp"

#include <algorithm>
#include <cmath>

namespace fundus {
namespace {

std::uint8_t round_to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void check_bbox(const BoundingBox& bbox, Size size) {
  if (!bbox.within(size))
    throw Error(ErrorCode::BboxOutOfBounds,
                "bbox (" + std::to_string(bbox.x0) + "," + std::to_string(bbox.y0) + " " + std::to_string(bbox.width) +
                    "x" + std::to_string(bbox.height) + ") outside " + std::to_string(size.width) + "x" +
                    std::to_string(size.height) + " image");
}

template <typename Img>
Img crop_impl(const Img& img, const BoundingBox& bbox) {
  check_bbox(bbox, img.size());
  constexpr int c = Img::channels;
  Img out(bbox.width, bbox.height);
  for (int y = 0; y < bbox.height; ++y) {
    auto src = img.row(bbox.y0 + y).subspan(static_cast<std::size_t>(bbox.x0) * c, static_cast<std::size_t>(bbox.width) * c);
    std::copy(src.begin(), src.end(), out.row(y).begin());
  }
  return out;
}

template <typename Img>
Img crop_pad_impl(const Img& img, const BoundingBox& bbox) {
  check_bbox(bbox, img.size());
  constexpr int c = Img::channels;
  const auto placement = square_placement(bbox);
  Img out(placement.side, placement.side);
  for (int y = 0; y < bbox.height; ++y) {
    auto src = img.row(bbox.y0 + y).subspan(static_cast<std::size_t>(bbox.x0) * c, static_cast<std::size_t>(bbox.width) * c);
    std::copy(src.begin(), src.end(), out.row(placement.offset_y + y).begin() + static_cast<std::ptrdiff_t>(placement.offset_x) * c);
  }
  return out;
}

struct Tap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of hi
};

// Half-pixel-center source taps for one axis.
std::vector<Tap> bilinear_taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    const double s = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, in - 1);
    taps[d] = {lo, hi, s - lo};
  }
  return taps;
}

template <typename Img>
Img resize_bilinear_impl(const Img& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorCode::Precondition, "resize target must be at least 1x1");
  if (img.width() == out_w && img.height() == out_h) return img;
  constexpr int c = Img::channels;
  const auto xs = bilinear_taps(img.width(), out_w);
  const auto ys = bilinear_taps(img.height(), out_h);
  Img out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto& ty = ys[y];
    auto top = img.row(ty.lo);
    auto bottom = img.row(ty.hi);
    auto dst = out.row(y);
    for (int x = 0; x < out_w; ++x) {
      const auto& tx = xs[x];
      for (int k = 0; k < c; ++k) {
        const double t = top[tx.lo * c + k] * (1.0 - tx.frac) + top[tx.hi * c + k] * tx.frac;
        const double b = bottom[tx.lo * c + k] * (1.0 - tx.frac) + bottom[tx.hi * c + k] * tx.frac;
        dst[x * c + k] = round_to_u8(t * (1.0 - ty.frac) + b * ty.frac);
      }
    }
  }
  return out;
}

template <typename Img>
Img resize_nearest_impl(const Img& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw Error(ErrorCode::Precondition, "resize target must be at least 1x1");
  auto index = [](int d, int in, int out) {
    const long long s = ((2LL * d + 1) * in) / (2LL * out);
    return static_cast<int>(std::min<long long>(s, in - 1));
  };
  std::vector<int> xs(out_w);
  for (int x = 0; x < out_w; ++x) xs[x] = index(x, img.width(), out_w);
  Img out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    auto src = img.row(index(y, img.height(), out_h));
    auto dst = out.row(y);
    for (int x = 0; x < out_w; ++x) dst[x] = src[xs[x]];
  }
  return out;
}

std::vector<int> tile_starts(int length, int tiles) {
  std::vector<int> starts(tiles + 1);
  for (int i = 0; i <= tiles; ++i) starts[i] = static_cast<int>(static_cast<long long>(i) * length / tiles);
  return starts;
}

void check_clahe(const GrayImage& gray, const ClaheParams& params) {
  if (!(params.clip_limit > 0.0)) throw Error(ErrorCode::Precondition, "clip_limit must be positive");
  if (params.tiles_x < 1 || params.tiles_y < 1) throw Error(ErrorCode::Precondition, "tile grid must be at least 1x1");
  if (gray.width() < params.tiles_x || gray.height() < params.tiles_y)
    throw Error(ErrorCode::ImageSmallerThanGrid, std::to_string(gray.width()) + "x" + std::to_string(gray.height()) +
                                                     " image cannot hold a " + std::to_string(params.tiles_x) + "x" +
                                                     std::to_string(params.tiles_y) + " tile grid");
}

// Interpolation position of each pixel between neighbouring tile centers.
// Pixels outside the outermost centers use the edge tile alone.
std::vector<Tap> tile_taps(const std::vector<int>& starts) {
  const int tiles = static_cast<int>(starts.size()) - 1;
  const int length = starts.back();
  std::vector<double> centers(tiles);
  for (int i = 0; i < tiles; ++i) centers[i] = (starts[i] + starts[i + 1] - 1) / 2.0;
  std::vector<Tap> taps(length);
  int i = 0;
  for (int p = 0; p < length; ++p) {
    if (p <= centers.front()) {
      taps[p] = {0, 0, 0.0};
    } else if (p >= centers.back()) {
      taps[p] = {tiles - 1, tiles - 1, 0.0};
    } else {
      while (centers[i + 1] <= p) ++i;
      taps[p] = {i, i + 1, (p - centers[i]) / (centers[i + 1] - centers[i])};
    }
  }
  return taps;
}

}  // namespace

SquarePlacement square_placement(const BoundingBox& bbox) {
  const int side = std::max(bbox.width, bbox.height);
  return {side, (side - bbox.width) / 2, (side - bbox.height) / 2};
}

GrayImage crop(const GrayImage& img, const BoundingBox& bbox) { return crop_impl(img, bbox); }
RasterImage crop(const RasterImage& img, const BoundingBox& bbox) { return crop_impl(img, bbox); }
BinaryMask crop(const BinaryMask& img, const BoundingBox& bbox) { return crop_impl(img, bbox); }

GrayImage crop_pad_square(const GrayImage& img, const BoundingBox& bbox) { return crop_pad_impl(img, bbox); }
RasterImage crop_pad_square(const RasterImage& img, const BoundingBox& bbox) { return crop_pad_impl(img, bbox); }
BinaryMask crop_pad_square(const BinaryMask& img, const BoundingBox& bbox) { return crop_pad_impl(img, bbox); }

std::vector<ClaheLut> clahe_tile_luts(const GrayImage& gray, const ClaheParams& params) {
  check_clahe(gray, params);
  const auto xs = tile_starts(gray.width(), params.tiles_x);
  const auto ys = tile_starts(gray.height(), params.tiles_y);

  std::vector<ClaheLut> luts;
  luts.reserve(static_cast<std::size_t>(params.tiles_x) * params.tiles_y);
  for (int ty = 0; ty < params.tiles_y; ++ty) {
    for (int tx = 0; tx < params.tiles_x; ++tx) {
      std::array<double, 256> hist{};
      for (int y = ys[ty]; y < ys[ty + 1]; ++y) {
        auto row = gray.row(y);
        for (int x = xs[tx]; x < xs[tx + 1]; ++x) hist[row[x]] += 1.0;
      }
      const double area = static_cast<double>(xs[tx + 1] - xs[tx]) * (ys[ty + 1] - ys[ty]);

      if (std::isfinite(params.clip_limit)) {
        const double clip = params.clip_limit * area / 256.0;
        double excess = 0.0;
        for (double& h : hist) {
          if (h > clip) {
            excess += h - clip;
            h = clip;
          }
        }
        const double share = excess / 256.0;
        for (double& h : hist) h += share;
      }

      ClaheLut lut{};
      double cumulative = 0.0;
      for (int v = 0; v < 256; ++v) {
        cumulative += hist[v];
        lut[v] = round_to_u8(255.0 * cumulative / area);
      }
      luts.push_back(lut);
    }
  }
  return luts;
}

GrayImage clahe(const GrayImage& gray, const ClaheParams& params) {
  const auto luts = clahe_tile_luts(gray, params);
  const auto col_taps = tile_taps(tile_starts(gray.width(), params.tiles_x));
  const auto row_taps = tile_taps(tile_starts(gray.height(), params.tiles_y));
  const int tiles_x = params.tiles_x;

  GrayImage out(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y) {
    const auto& ry = row_taps[y];
    auto src = gray.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < gray.width(); ++x) {
      const auto& rx = col_taps[x];
      const int v = src[x];
      const double top = luts[ry.lo * tiles_x + rx.lo][v] * (1.0 - rx.frac) + luts[ry.lo * tiles_x + rx.hi][v] * rx.frac;
      const double bottom =
          luts[ry.hi * tiles_x + rx.lo][v] * (1.0 - rx.frac) + luts[ry.hi * tiles_x + rx.hi][v] * rx.frac;
      dst[x] = round_to_u8(top * (1.0 - ry.frac) + bottom * ry.frac);
    }
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) { return resize_bilinear_impl(img, out_w, out_h); }
RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
  return resize_bilinear_impl(img, out_w, out_h);
}
BinaryMask resize_nearest(const BinaryMask& mask, int out_w, int out_h) { return resize_nearest_impl(mask, out_w, out_h); }
GrayImage resize_nearest(const GrayImage& img, int out_w, int out_h) { return resize_nearest_impl(img, out_w, out_h); }

nlohmann::json to_json(const Provenance& p) {
  nlohmann::json j;
  j["source"] = p.source;
  j["bbox"] = {{"x0", p.bbox.x0}, {"y0", p.bbox.y0}, {"width", p.bbox.width}, {"height", p.bbox.height}};
  // JSON has no infinity; null stands for "no clipping".
  j["clip_limit"] = std::isfinite(p.clahe.clip_limit) ? nlohmann::json(p.clahe.clip_limit) : nlohmann::json(nullptr);
  j["tiles"] = {p.clahe.tiles_x, p.clahe.tiles_y};
  j["resize"] = {{"width", p.size},
                 {"height", p.size},
                 {"method", "bilinear"},
                 {"order", p.clahe_before_resize ? "clahe-then-resize" : "resize-then-clahe"}};
  j["version"] = p.version;
  return j;
}

std::vector<std::string> validate_provenance_json(const nlohmann::json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"provenance must be a JSON object"};
  static const std::vector<std::string> keys = {"source", "bbox", "clip_limit", "tiles", "resize", "version"};
  for (const auto& key : keys)
    if (!j.contains(key)) problems.push_back("missing key '" + key + "'");
  for (const auto& [key, value] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) problems.push_back("unexpected key '" + key + "'");
  if (!problems.empty()) return problems;

  if (!j["source"].is_string()) problems.push_back("source must be a string");
  if (!j["version"].is_string() || j["version"].get<std::string>().empty()) problems.push_back("version must be a non-empty string");
  const auto& bbox = j["bbox"];
  if (!bbox.is_object()) {
    problems.push_back("bbox must be an object");
  } else {
    for (const char* key : {"x0", "y0", "width", "height"})
      if (!bbox.contains(key) || !bbox[key].is_number_integer()) problems.push_back(std::string("bbox.") + key + " must be an integer");
    if (problems.empty() && (bbox["width"].get<int>() < 1 || bbox["height"].get<int>() < 1 || bbox["x0"].get<int>() < 0 ||
                             bbox["y0"].get<int>() < 0))
      problems.push_back("bbox must have non-negative origin and positive extent");
  }
  const auto& clip = j["clip_limit"];
  if (!(clip.is_null() || (clip.is_number() && clip.get<double>() > 0.0))) problems.push_back("clip_limit must be positive or null");
  const auto& tiles = j["tiles"];
  if (!tiles.is_array() || tiles.size() != 2 || !tiles[0].is_number_integer() || !tiles[1].is_number_integer() ||
      tiles[0].get<int>() < 1 || tiles[1].get<int>() < 1)
    problems.push_back("tiles must be two positive integers");
  const auto& resize = j["resize"];
  if (!resize.is_object() || !resize.contains("width") || !resize.contains("height") || !resize["width"].is_number_integer() ||
      !resize["height"].is_number_integer() || resize["width"].get<int>() < 1 || resize["height"].get<int>() < 1 ||
      !resize.contains("order") || !resize["order"].is_string())
    problems.push_back("resize must record positive width/height and the stage order");
  return problems;
}

Provenance provenance_from_json(const nlohmann::json& j) {
  const auto problems = validate_provenance_json(j);
  if (!problems.empty()) throw Error(ErrorCode::InvalidConfig, "invalid provenance: " + problems.front());
  Provenance p;
  p.source = j["source"].get<std::string>();
  p.bbox = {j["bbox"]["x0"].get<int>(), j["bbox"]["y0"].get<int>(), j["bbox"]["width"].get<int>(),
            j["bbox"]["height"].get<int>()};
  p.clahe.clip_limit = j["clip_limit"].is_null() ? std::numeric_limits<double>::infinity() : j["clip_limit"].get<double>();
  p.clahe.tiles_x = j["tiles"][0].get<int>();
  p.clahe.tiles_y = j["tiles"][1].get<int>();
  p.size = j["resize"]["width"].get<int>();
  p.clahe_before_resize = j["resize"]["order"].get<std::string>() == "clahe-then-resize";
  p.version = j["version"].get<std::string>();
  return p;
}

StandardizedImage standardize(const RasterImage& photo, const StandardizeOptions& options, const std::string& source) {
  const BoundingBox bbox = locate_retina(photo);
  GrayImage gray = to_grayscale(crop_pad_square(photo, bbox));
  if (options.clahe_before_resize) {
    gray = resize_bilinear(clahe(gray, options.clahe), options.size, options.size);
  } else {
    gray = clahe(resize_bilinear(gray, options.size, options.size), options.clahe);
  }
  Provenance provenance{source, bbox, options.clahe, options.size, options.clahe_before_resize, kPipelineVersion};
  return {std::move(gray), std::move(provenance)};
}

BinaryMask standardize_label(const BinaryMask& label, const BoundingBox& bbox, Size source_size, int size) {
  if (label.size() != source_size)
    throw Error(ErrorCode::ShapeMismatch, "label is " + std::to_string(label.width()) + "x" + std::to_string(label.height()) +
                                              ", photo is " + std::to_string(source_size.width) + "x" +
                                              std::to_string(source_size.height));
  return resize_nearest(crop_pad_square(label, bbox), size, size);
}

}  // namespace fundus
