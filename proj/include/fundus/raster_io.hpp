#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fundus/raster.hpp"

namespace fundus {

enum class RasterFormat { Png, Ppm, Pgm };

using AnyRaster = std::variant<RasterImage, GrayImage>;

/// Decodes PNG, PPM/PGM (binary and ASCII), BMP and JPEG, sniffed by content.
/// 16-bit sources keep the high byte. Alpha is dropped.
AnyRaster read_raster(const std::filesystem::path& path);
AnyRaster decode_raster(std::span<const std::uint8_t> bytes);

/// Gray sources are replicated to three channels.
RasterImage read_rgb(const std::filesystem::path& path);
/// Color sources go through to_grayscale.
GrayImage read_gray(const std::filesystem::path& path);
/// Label/FOV image; see mask_from_gray.
BinaryMask read_mask(const std::filesystem::path& path);

/// PPM is only valid for RGB images and PGM only for gray ones; PNG takes both.
std::vector<std::uint8_t> encode_raster(const RasterImage& img, RasterFormat format);
std::vector<std::uint8_t> encode_raster(const GrayImage& img, RasterFormat format);
/// Masks are written with {0, 255} samples.
std::vector<std::uint8_t> encode_raster(const BinaryMask& mask, RasterFormat format);

void write_raster(const RasterImage& img, const std::filesystem::path& path, RasterFormat format);
void write_raster(const GrayImage& img, const std::filesystem::path& path, RasterFormat format);
void write_raster(const BinaryMask& mask, const std::filesystem::path& path, RasterFormat format);

/// Format from the file extension (.png, .ppm, .pgm).
RasterFormat format_from_extension(const std::filesystem::path& path);

// Portable FloatMap, single channel: "Pf\n<w> <h>\n-1.0\n" followed by
// little-endian float32 rows, bottom row first.
std::vector<std::uint8_t> encode_pfm(const ProbabilityMap& map);
ProbabilityMap decode_pfm(std::span<const std::uint8_t> bytes);
void write_pfm(const ProbabilityMap& map, const std::filesystem::path& path);
ProbabilityMap read_pfm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace fundus
