#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "palynseg/imgcore.hpp"

namespace palynseg {

class ImageDecodeError : public Error {
 public:
  using Error::Error;
};

class OutputError : public Error {
 public:
  using Error::Error;
};

/// True for extensions the reader accepts (.png, .tif, .tiff, any case).
bool is_image_path(const std::filesystem::path& path);

/// PNG or TIFF, detected by signature. Output is 8-bit with 1 or 3 channels:
/// alpha is dropped, palettes expanded and 16-bit samples reduced to 8.
Raster read_image(const std::filesystem::path& path);
Raster decode_image(std::span<const std::uint8_t> bytes);

/// Deterministic PNG encoding of a 1- or 3-channel raster.
std::vector<std::uint8_t> encode_png(const Raster& img);
void write_tiff(const std::filesystem::path& path, const Raster& img);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// 0 / 255 raster of a mask, and back (nonzero is foreground).
Raster mask_to_raster(const BinaryMask& mask);
BinaryMask raster_to_mask(const Raster& img);

}  // namespace palynseg
