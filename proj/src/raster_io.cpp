#include "fundus/raster_io.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>

namespace fundus {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptFile, what); }

bool has_prefix(std::span<const std::uint8_t> bytes, std::string_view prefix) {
  return bytes.size() >= prefix.size() &&
         std::memcmp(bytes.data(), prefix.data(), prefix.size()) == 0;
}

// ---------------------------------------------------------------- PNM ----

class TokenReader {
 public:
  explicit TokenReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long long integer() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) corrupt("expected integer in header");
    long long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1LL << 31)) corrupt("header integer too large");
      ++pos_;
    }
    return value;
  }

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) out.push_back(static_cast<char>(bytes_[pos_++]));
    if (out.empty()) corrupt("unexpected end of header");
    return out;
  }

  // Exactly one whitespace byte separates the header from a binary payload.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) corrupt("missing header terminator");
    ++pos_;
  }

  std::size_t position() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

AnyRaster decode_pnm(std::span<const std::uint8_t> bytes) {
  const char kind = static_cast<char>(bytes[1]);
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;
  const bool binary = kind == '5' || kind == '6';

  TokenReader reader(bytes);
  reader.advance(2);
  const long long width = reader.integer();
  const long long height = reader.integer();
  const long long maxval = reader.integer();
  if (width < 1 || height < 1) corrupt("PNM dimensions must be positive");
  if (maxval < 1 || maxval > 65535) corrupt("PNM maxval out of range");
  const bool wide = maxval > 255;

  const std::size_t count = static_cast<std::size_t>(width) * height * channels;
  std::vector<std::uint8_t> samples(count);
  if (binary) {
    reader.single_space();
    const std::size_t stride = wide ? 2 : 1;
    const std::size_t start = reader.position();
    if (bytes.size() < start || bytes.size() - start < count * stride) corrupt("PNM payload truncated");
    // 16-bit samples are big-endian; keep the high byte.
    for (std::size_t i = 0; i < count; ++i) samples[i] = bytes[start + i * stride];
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long long v = reader.integer();
      if (v > maxval) corrupt("PNM sample exceeds maxval");
      samples[i] = static_cast<std::uint8_t>(wide ? (v >> 8) : v);
    }
  }

  const int w = static_cast<int>(width), h = static_cast<int>(height);
  if (channels == 3) return RasterImage(w, h, std::move(samples));
  return GrayImage(w, h, std::move(samples));
}

std::vector<std::uint8_t> encode_pnm(std::span<const std::uint8_t> samples, int width, int height,
                                     bool color) {
  const std::string header =
      std::string(color ? "P6" : "P5") + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), samples.begin(), samples.end());
  return out;
}

// ---------------------------------------------------------------- BMP ----

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 | std::uint32_t(b[at + 2]) << 16 |
         std::uint32_t(b[at + 3]) << 24;
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

AnyRaster decode_bmp(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 54) corrupt("BMP header truncated");
  const std::uint32_t data_offset = le32(bytes, 10);
  const std::uint32_t dib_size = le32(bytes, 14);
  if (dib_size < 40) throw Error(ErrorCode::UnsupportedFormat, "BMP core headers are not supported");
  const auto width = static_cast<std::int32_t>(le32(bytes, 18));
  const auto raw_height = static_cast<std::int32_t>(le32(bytes, 22));
  const std::uint16_t bpp = le16(bytes, 28);
  const std::uint32_t compression = le32(bytes, 30);
  if (compression != 0 && !(compression == 3 && bpp == 32))
    throw Error(ErrorCode::UnsupportedFormat, "compressed BMP is not supported");
  if (bpp != 8 && bpp != 24 && bpp != 32)
    throw Error(ErrorCode::UnsupportedFormat, "BMP bit depth " + std::to_string(bpp) + " is not supported");
  if (width < 1 || raw_height == 0 || raw_height == INT32_MIN) corrupt("BMP dimensions invalid");
  const bool bottom_up = raw_height > 0;
  const int height = bottom_up ? raw_height : -raw_height;

  const std::size_t row_bytes = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (data_offset > bytes.size() || bytes.size() - data_offset < row_bytes * height) corrupt("BMP payload truncated");

  auto source_row = [&](int y) {
    const int stored = bottom_up ? height - 1 - y : y;
    return bytes.subspan(data_offset + row_bytes * stored, row_bytes);
  };

  if (bpp == 8) {
    std::uint32_t colors = le32(bytes, 46);
    if (colors == 0) colors = 256;
    const std::size_t palette_at = 14 + dib_size;
    if (colors > 256 || palette_at + 4 * colors > data_offset) corrupt("BMP palette truncated");
    bool gray_palette = true;
    for (std::uint32_t i = 0; i < colors; ++i) {
      const auto* p = bytes.data() + palette_at + 4 * i;
      if (p[0] != p[1] || p[1] != p[2]) gray_palette = false;
    }
    RasterImage rgb(width, height);
    for (int y = 0; y < height; ++y) {
      auto src = source_row(y);
      for (int x = 0; x < width; ++x) {
        const std::uint32_t index = src[x];
        if (index >= colors) corrupt("BMP palette index out of range");
        const auto* p = bytes.data() + palette_at + 4 * index;
        rgb.at(x, y, 0) = p[2];
        rgb.at(x, y, 1) = p[1];
        rgb.at(x, y, 2) = p[0];
      }
    }
    if (gray_palette) {
      GrayImage gray(width, height);
      for (std::size_t i = 0; i < gray.pixel_count(); ++i) gray.data()[i] = rgb.data()[3 * i];
      return gray;
    }
    return rgb;
  }

  const int step = bpp / 8;
  RasterImage rgb(width, height);
  for (int y = 0; y < height; ++y) {
    auto src = source_row(y);
    for (int x = 0; x < width; ++x) {
      rgb.at(x, y, 0) = src[x * step + 2];
      rgb.at(x, y, 1) = src[x * step + 1];
      rgb.at(x, y, 2) = src[x * step + 0];
    }
  }
  return rgb;
}

// ---------------------------------------------------------------- PNG ----

struct PngSource {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < length) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->bytes.data() + src->pos, length);
  src->pos += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

void png_silent_warning(png_structp, png_const_charp) {}

struct PngMessage {
  char* text;
  std::size_t size;
};

[[noreturn]] void png_capture_error(png_structp png, png_const_charp what) {
  if (auto* sink = static_cast<PngMessage*>(png_get_error_ptr(png)); sink && sink->text)
    std::snprintf(sink->text, sink->size, "libpng: %s", what);
  png_longjmp(png, 1);
}

struct PngDecoded {
  int width = 0;
  int height = 0;
  int channels = 0;
};

// libpng reports errors via longjmp; only trivially destructible locals live
// in this frame. `pixels` and `rows` are owned by the caller.
bool png_decode_into(PngSource* source, std::vector<std::uint8_t>* pixels, std::vector<png_bytep>* rows,
                     PngDecoded* info_out, char* message, std::size_t message_size) {
  PngMessage sink{message, message_size};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &sink, png_capture_error, png_silent_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, source, png_read_callback);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int channels = png_get_channels(png, info);
  if (width < 1 || height < 1 || width > (1u << 20) || height > (1u << 20) || (channels != 1 && channels != 3)) {
    std::snprintf(message, message_size, "unsupported PNG layout");
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  pixels->resize(static_cast<std::size_t>(width) * height * channels);
  rows->resize(height);
  for (png_uint_32 y = 0; y < height; ++y) (*rows)[y] = pixels->data() + static_cast<std::size_t>(y) * width * channels;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  info_out->width = static_cast<int>(width);
  info_out->height = static_cast<int>(height);
  info_out->channels = channels;
  return true;
}

AnyRaster decode_png(std::span<const std::uint8_t> bytes) {
  PngSource source{bytes};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  PngDecoded decoded;
  char message[128] = "PNG decode failed";
  if (!png_decode_into(&source, &pixels, &rows, &decoded, message, sizeof message)) corrupt(message);
  if (decoded.channels == 3) return RasterImage(decoded.width, decoded.height, std::move(pixels));
  return GrayImage(decoded.width, decoded.height, std::move(pixels));
}

bool png_encode_into(std::span<const std::uint8_t> samples, int width, int height, int channels,
                     std::vector<std::uint8_t>* out) {
  PngMessage sink{nullptr, 0};
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &sink, png_capture_error, png_silent_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, png_write_callback, png_flush_callback);
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, width, height, 8, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(samples.data() + static_cast<std::size_t>(y) * width * channels));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> samples, int width, int height, int channels) {
  std::vector<std::uint8_t> out;
  if (!png_encode_into(samples, width, height, channels, &out)) throw Error(ErrorCode::IoError, "PNG encoding failed");
  return out;
}

// --------------------------------------------------------------- JPEG ----

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silent_output(j_common_ptr) {}

// 0 on success, 1 on decoder error, 2 on unsupported color space.
int jpeg_decode_into(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>* pixels, PngDecoded* info_out,
                     JpegErrorManager* err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.output_message = jpeg_silent_output;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return 1;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space == JCS_CMYK || cinfo.jpeg_color_space == JCS_YCCK) {
    jpeg_destroy_decompress(&cinfo);
    return 2;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const int channels = cinfo.output_components;
  pixels->resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels->data() + static_cast<std::size_t>(cinfo.output_scanline) * cinfo.output_width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  info_out->width = static_cast<int>(cinfo.output_width);
  info_out->height = static_cast<int>(cinfo.output_height);
  info_out->channels = channels;
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return 0;
}

AnyRaster decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> pixels;
  PngDecoded decoded;
  JpegErrorManager err{};
  const int status = jpeg_decode_into(bytes, &pixels, &decoded, &err);
  if (status == 2) throw Error(ErrorCode::UnsupportedFormat, "CMYK JPEG is not supported");
  if (status != 0) corrupt(std::string("JPEG: ") + err.message);
  if (decoded.channels == 3) return RasterImage(decoded.width, decoded.height, std::move(pixels));
  return GrayImage(decoded.width, decoded.height, std::move(pixels));
}

// ---------------------------------------------------------------- PFM ----

void put_f32_le(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<std::uint8_t>(bits));
  out.push_back(static_cast<std::uint8_t>(bits >> 8));
  out.push_back(static_cast<std::uint8_t>(bits >> 16));
  out.push_back(static_cast<std::uint8_t>(bits >> 24));
}

float get_f32(std::span<const std::uint8_t> b, std::size_t at, bool little_endian) {
  std::uint32_t bits = little_endian ? le32(b, at)
                                     : (std::uint32_t(b[at]) << 24 | std::uint32_t(b[at + 1]) << 16 |
                                        std::uint32_t(b[at + 2]) << 8 | std::uint32_t(b[at + 3]));
  return std::bit_cast<float>(bits);
}

}  // namespace

AnyRaster decode_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) corrupt("empty file");
  if (has_prefix(bytes, "\x89PNG\r\n\x1a\n")) return decode_png(bytes);
  if (has_prefix(bytes, "\xFF\xD8\xFF")) return decode_jpeg(bytes);
  if (has_prefix(bytes, "BM")) return decode_bmp(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' && bytes[1] != '4')
    return decode_pnm(bytes);
  throw Error(ErrorCode::UnsupportedFormat, "unrecognized image signature");
}

AnyRaster read_raster(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_raster(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

RasterImage read_rgb(const fs::path& path) {
  auto any = read_raster(path);
  if (auto* gray = std::get_if<GrayImage>(&any)) return gray_to_rgb(*gray);
  return std::get<RasterImage>(std::move(any));
}

GrayImage read_gray(const fs::path& path) {
  auto any = read_raster(path);
  if (auto* rgb = std::get_if<RasterImage>(&any)) return to_grayscale(*rgb);
  return std::get<GrayImage>(std::move(any));
}

BinaryMask read_mask(const fs::path& path) { return mask_from_gray(read_gray(path)); }

RasterFormat format_from_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return RasterFormat::Png;
  if (ext == ".ppm") return RasterFormat::Ppm;
  if (ext == ".pgm") return RasterFormat::Pgm;
  throw Error(ErrorCode::UnsupportedFormat, "cannot write extension '" + ext + "'");
}

std::vector<std::uint8_t> encode_raster(const RasterImage& img, RasterFormat format) {
  if (img.empty()) throw Error(ErrorCode::Precondition, "cannot encode a zero-size image");
  switch (format) {
    case RasterFormat::Png: return encode_png(img.data(), img.width(), img.height(), 3);
    case RasterFormat::Ppm: return encode_pnm(img.data(), img.width(), img.height(), true);
    case RasterFormat::Pgm: break;
  }
  throw Error(ErrorCode::UnsupportedFormat, "PGM cannot hold a color image");
}

std::vector<std::uint8_t> encode_raster(const GrayImage& img, RasterFormat format) {
  if (img.empty()) throw Error(ErrorCode::Precondition, "cannot encode a zero-size image");
  switch (format) {
    case RasterFormat::Png: return encode_png(img.data(), img.width(), img.height(), 1);
    case RasterFormat::Pgm: return encode_pnm(img.data(), img.width(), img.height(), false);
    case RasterFormat::Ppm: break;
  }
  throw Error(ErrorCode::UnsupportedFormat, "PPM cannot hold a gray image");
}

std::vector<std::uint8_t> encode_raster(const BinaryMask& mask, RasterFormat format) {
  if (mask.empty()) throw Error(ErrorCode::Precondition, "cannot encode a zero-size image");
  return encode_raster(mask_to_gray(mask), format);
}

void write_raster(const RasterImage& img, const fs::path& path, RasterFormat format) {
  write_file_bytes(path, encode_raster(img, format));
}
void write_raster(const GrayImage& img, const fs::path& path, RasterFormat format) {
  write_file_bytes(path, encode_raster(img, format));
}
void write_raster(const BinaryMask& mask, const fs::path& path, RasterFormat format) {
  write_file_bytes(path, encode_raster(mask, format));
}

std::vector<std::uint8_t> encode_pfm(const ProbabilityMap& map) {
  if (map.empty()) throw Error(ErrorCode::Precondition, "cannot encode a zero-size map");
  validate(map);
  const std::string header = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + map.pixel_count() * 4);
  for (int y = map.height() - 1; y >= 0; --y)
    for (float v : map.row(y)) put_f32_le(out, v);
  return out;
}

ProbabilityMap decode_pfm(std::span<const std::uint8_t> bytes) {
  if (!has_prefix(bytes, "Pf") || bytes.size() < 3 || !std::isspace(bytes[2]))
    throw Error(ErrorCode::BadMagic, "expected single-channel PFM magic 'Pf'");
  TokenReader reader(bytes);
  reader.advance(2);
  const long long width = reader.integer();
  const long long height = reader.integer();
  const std::string scale_text = reader.token();
  reader.single_space();
  double scale = 0.0;
  try {
    scale = std::stod(scale_text);
  } catch (const std::exception&) {
    corrupt("PFM scale is not a number");
  }
  if (scale == 0.0 || width < 1 || height < 1) corrupt("PFM header invalid");
  const bool little_endian = scale < 0.0;

  const std::size_t start = reader.position();
  const std::size_t expected = static_cast<std::size_t>(width) * height * 4;
  if (bytes.size() - start != expected)
    throw Error(ErrorCode::ShapeMismatch, "PFM payload of " + std::to_string(bytes.size() - start) +
                                              " bytes does not match header " + std::to_string(width) + "x" +
                                              std::to_string(height));

  ProbabilityMap map(static_cast<int>(width), static_cast<int>(height));
  std::size_t at = start;
  for (int y = map.height() - 1; y >= 0; --y) {
    for (float& v : map.row(y)) {
      v = get_f32(bytes, at, little_endian);
      at += 4;
    }
  }
  validate(map);
  return map;
}

void write_pfm(const ProbabilityMap& map, const fs::path& path) { write_file_bytes(path, encode_pfm(map)); }

ProbabilityMap read_pfm(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_pfm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place: " + path.string());
  }
}

}  // namespace fundus
