#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "fundus/raster.hpp"
#include "fundus/raster_io.hpp"
#include "synthetic.hpp"

using namespace fundus;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Precondition;
}

// Minimal PFM reader written from the format description, independent of decode_pfm.
std::vector<float> independent_pfm_payload(const std::vector<std::uint8_t>& bytes, int& w, int& h) {
  std::string text(bytes.begin(), bytes.end());
  std::size_t pos = 0;
  auto token = [&] {
    while (std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (!std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };
  REQUIRE(token() == "Pf");
  w = std::stoi(token());
  h = std::stoi(token());
  const double scale = std::stod(token());
  REQUIRE(scale < 0.0);
  ++pos;  // single whitespace after the scale
  std::vector<float> rows(static_cast<std::size_t>(w) * h);
  REQUIRE(bytes.size() - pos == rows.size() * 4);
  for (int fy = 0; fy < h; ++fy) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = bytes.data() + pos + (static_cast<std::size_t>(fy) * w + x) * 4;
      const std::uint32_t bits = p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24);
      float v;
      std::memcpy(&v, &bits, 4);
      rows[static_cast<std::size_t>(h - 1 - fy) * w + x] = v;
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("image construction contract") {
  CHECK(RasterImage().empty());
  CHECK(RasterImage(3, 2).data().size() == 18);
  CHECK(GrayImage(3, 2).data().size() == 6);
  CHECK(code_of([] { GrayImage(0, 4); }) == ErrorCode::Precondition);
  CHECK(code_of([] { GrayImage(2, 2, std::vector<std::uint8_t>(3)); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { make_mask(2, 1, {0, 2}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { make_probability_map(1, 1, {1.5f}); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { make_probability_map(1, 1, {std::numeric_limits<float>::quiet_NaN()}); }) ==
        ErrorCode::NonFiniteValue);
}

TEST_CASE("grayscale conversion") {
  RasterImage white(2, 2, 255), black(2, 2, 0), red(1, 1);
  red.at(0, 0, 0) = 255;
  CHECK(to_grayscale(white) == GrayImage(2, 2, 255));
  CHECK(to_grayscale(black) == GrayImage(2, 2, 0));
  CHECK(to_grayscale(red).at(0, 0) == 76);

  SUBCASE("channel-constant inputs are fixed") {
    RasterImage ramp(256, 1);
    for (int v = 0; v < 256; ++v)
      for (int c = 0; c < 3; ++c) ramp.at(v, 0, c) = static_cast<std::uint8_t>(v);
    const auto g = to_grayscale(ramp);
    for (int v = 0; v < 256; ++v) CHECK(g.at(v, 0) == v);
  }
  SUBCASE("monotone in each channel") {
    fundus::SplitMix64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      RasterImage a(1, 256);
      const int channel = static_cast<int>(rng.below(3));
      const auto other1 = static_cast<std::uint8_t>(rng.below(256)), other2 = static_cast<std::uint8_t>(rng.below(256));
      for (int v = 0; v < 256; ++v) {
        a.at(0, v, channel) = static_cast<std::uint8_t>(v);
        a.at(0, v, (channel + 1) % 3) = other1;
        a.at(0, v, (channel + 2) % 3) = other2;
      }
      const auto g = to_grayscale(a);
      for (int v = 1; v < 256; ++v) REQUIRE(g.at(0, v) >= g.at(0, v - 1));
    }
  }
}

TEST_CASE("PPM decoding of a hand-written fixture") {
  auto bytes = bytes_of("P6\n2 2\n255\n");
  const std::uint8_t px[12] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 250, 251, 252};
  bytes.insert(bytes.end(), px, px + 12);
  const auto any = decode_raster(bytes);
  REQUIRE(std::holds_alternative<RasterImage>(any));
  const auto& img = std::get<RasterImage>(any);
  CHECK(img.width() == 2);
  CHECK(img.height() == 2);
  CHECK(std::vector<std::uint8_t>(img.data().begin(), img.data().end()) == std::vector<std::uint8_t>(px, px + 12));

  auto ascii = decode_raster(bytes_of("P2\n2 1\n255\n7 200\n"));
  REQUIRE(std::holds_alternative<GrayImage>(ascii));
  CHECK(std::get<GrayImage>(ascii).at(1, 0) == 200);

  SUBCASE("16-bit samples keep the high byte") {
    auto wide = bytes_of("P5\n1 1\n65535\n");
    wide.push_back(0xAB);
    wide.push_back(0xCD);
    CHECK(std::get<GrayImage>(decode_raster(wide)).at(0, 0) == 0xAB);
  }
}

TEST_CASE("codec roundtrips are bit-exact") {
  SplitMix64 rng(99);
  const auto dir = synth::temp_dir("raster");
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(40)), h = 1 + static_cast<int>(rng.below(40));
    RasterImage rgb(w, h);
    for (auto& v : rgb.data()) v = static_cast<std::uint8_t>(rng.below(256));
    const GrayImage gray = synth::random_gray(rng, w, h);
    const BinaryMask mask = synth::random_mask(rng, w, h, 0.4);

    CHECK(std::get<RasterImage>(decode_raster(encode_raster(rgb, RasterFormat::Png))) == rgb);
    CHECK(std::get<RasterImage>(decode_raster(encode_raster(rgb, RasterFormat::Ppm))) == rgb);
    CHECK(std::get<GrayImage>(decode_raster(encode_raster(gray, RasterFormat::Png))) == gray);
    CHECK(std::get<GrayImage>(decode_raster(encode_raster(gray, RasterFormat::Pgm))) == gray);

    write_raster(mask, dir / "m.pgm", RasterFormat::Pgm);
    CHECK(read_mask(dir / "m.pgm") == mask);
    write_raster(rgb, dir / "c.png", RasterFormat::Png);
    CHECK(read_rgb(dir / "c.png") == rgb);

    std::vector<float> values(static_cast<std::size_t>(w) * h);
    for (auto& v : values) v = static_cast<float>(rng.uniform());
    const auto map = make_probability_map(w, h, values);
    write_pfm(map, dir / "p.pfm");
    CHECK(read_pfm(dir / "p.pfm") == map);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("masks are stored with samples 0 and 255") {
  const auto mask = make_mask(2, 1, {0, 1});
  const auto gray = std::get<GrayImage>(decode_raster(encode_raster(mask, RasterFormat::Pgm)));
  CHECK(gray.at(0, 0) == 0);
  CHECK(gray.at(1, 0) == 255);
}

TEST_CASE("encoding an empty image is a precondition violation") {
  CHECK(code_of([] { encode_raster(GrayImage(), RasterFormat::Png); }) == ErrorCode::Precondition);
  CHECK(code_of([] { encode_raster(RasterImage(), RasterFormat::Ppm); }) == ErrorCode::Precondition);
}

TEST_CASE("decode errors are distinguishable") {
  CHECK(code_of([] { decode_raster(bytes_of("GIF89a....")); }) == ErrorCode::UnsupportedFormat);
  CHECK(code_of([] { decode_raster(bytes_of("P6\n4 4\n255\nabc")); }) == ErrorCode::CorruptFile);
  CHECK(code_of([] { read_raster("/nonexistent/file.png"); }) == ErrorCode::IoError);

  const auto png = encode_raster(GrayImage(16, 16, 9), RasterFormat::Png);
  const std::vector<std::uint8_t> cut(png.begin(), png.begin() + static_cast<long>(png.size() / 2));
  CHECK(code_of([&] { decode_raster(cut); }) == ErrorCode::CorruptFile);
}

TEST_CASE("PFM byte layout") {
  const auto bytes = encode_pfm(make_probability_map(1, 1, {0.5f}));
  auto expected = bytes_of("Pf\n1 1\n-1.0\n");
  for (std::uint8_t b : {0x00, 0x00, 0x00, 0x3F}) expected.push_back(b);
  CHECK(bytes == expected);

  SUBCASE("rows are stored bottom-first") {
    const auto map = make_probability_map(3, 2, {0.f, 0.25f, 0.5f, 0.75f, 1.f, 0.125f});
    int w = 0, h = 0;
    const auto payload = independent_pfm_payload(encode_pfm(map), w, h);
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(payload == map.samples());
  }
  SUBCASE("errors") {
    CHECK(code_of([] { decode_pfm(bytes_of("PF\n1 1\n-1.0\n\0\0\0\0")); }) == ErrorCode::BadMagic);
    auto short_payload = bytes_of("Pf\n2 2\n-1.0\n");
    short_payload.resize(short_payload.size() + 8);
    CHECK(code_of([&] { decode_pfm(short_payload); }) == ErrorCode::ShapeMismatch);
    auto nan = bytes_of("Pf\n1 1\n-1.0\n");
    for (std::uint8_t b : {0x00, 0x00, 0xC0, 0x7F}) nan.push_back(b);
    CHECK(code_of([&] { decode_pfm(nan); }) == ErrorCode::NonFiniteValue);
  }
}

TEST_CASE("error codes render as stable names") {
  CHECK(std::string(to_string(ErrorCode::NoRetinaFound)) == "no-retina-found");
  const Error e(ErrorCode::EmptyMask, "nothing");
  CHECK(std::string(e.what()) == "empty-mask: nothing");
  CHECK(e.detail() == "nothing");
}
