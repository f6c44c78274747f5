#include "palynseg/imageio.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>
#include <tiffio.h>
#include <unistd.h>

namespace palynseg {

namespace fs = std::filesystem;

bool is_image_path(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

namespace {

struct PngSource {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
  char message[256] = {};
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (n > src->data.size() - src->pos) png_error(png, "truncated data");
  std::memcpy(out, src->data.data() + src->pos, n);
  src->pos += n;
}

void png_fail(png_structp png, png_const_charp msg) {
  auto* src = static_cast<PngSource*>(png_get_error_ptr(png));
  std::snprintf(src->message, sizeof src->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_quiet(png_structp, png_const_charp) {}

// Palettes and low bit depths expand to 8 bits, 16-bit samples are rounded to
// 8 and alpha is stripped. Everything below setjmp only assigns to objects that
// already exist, so the longjmp path skips no destructors.
Raster decode_png(std::span<const std::uint8_t> bytes) {
  PngSource src{bytes};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &src, png_fail, png_quiet);
  if (!png) throw ImageDecodeError("PNG: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageDecodeError("PNG: out of memory");
  }
  Raster out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageDecodeError(std::string("PNG: ") + src.message);
  }
  png_set_read_fn(png, &src, png_read_mem);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  if (w < 1 || h < 1 || w > (1u << 16) || h > (1u << 16)) png_error(png, "unsupported dimensions");
  const int type = png_get_color_type(png, info);
  png_set_expand(png);
  png_set_scale_16(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const bool color = (type & PNG_COLOR_MASK_COLOR) != 0 || type == PNG_COLOR_TYPE_PALETTE;
  out = Raster(static_cast<int>(w), static_cast<int>(h), color ? 3 : 1);
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w) * out.channels()) {
    png_error(png, "unexpected row layout");
  }
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = out.row(static_cast<int>(y));
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

struct MemStream {
  std::span<const std::uint8_t> data;
  toff_t pos = 0;
};

tsize_t mem_read(thandle_t h, tdata_t buf, tsize_t size) {
  auto* s = static_cast<MemStream*>(h);
  if (s->pos >= s->data.size()) return 0;
  const auto n = std::min<toff_t>(static_cast<toff_t>(size), s->data.size() - s->pos);
  std::memcpy(buf, s->data.data() + s->pos, n);
  s->pos += n;
  return static_cast<tsize_t>(n);
}

tsize_t mem_write(thandle_t, tdata_t, tsize_t) { return 0; }

toff_t mem_seek(thandle_t h, toff_t off, int whence) {
  auto* s = static_cast<MemStream*>(h);
  switch (whence) {
    case SEEK_SET: s->pos = off; break;
    case SEEK_CUR: s->pos += off; break;
    case SEEK_END: s->pos = s->data.size() + off; break;
    default: return static_cast<toff_t>(-1);
  }
  return s->pos;
}

int mem_close(thandle_t) { return 0; }
toff_t mem_size(thandle_t h) { return static_cast<MemStream*>(h)->data.size(); }
int mem_map(thandle_t, tdata_t*, toff_t*) { return 0; }
void mem_unmap(thandle_t, tdata_t, toff_t) {}

void silent_handler(const char*, const char*, va_list) {}

Raster decode_tiff(std::span<const std::uint8_t> bytes) {
  TIFFSetErrorHandler(silent_handler);
  TIFFSetWarningHandler(silent_handler);
  MemStream stream{bytes};
  TIFF* tif = TIFFClientOpen("memory", "rm", &stream, mem_read, mem_write, mem_seek, mem_close, mem_size, mem_map,
                             mem_unmap);
  if (!tif) throw ImageDecodeError("TIFF: cannot open");
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  std::uint16_t photometric = PHOTOMETRIC_MINISBLACK;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif, TIFFTAG_PHOTOMETRIC, &photometric);
  if (w < 1 || h < 1 || w > (1u << 16) || h > (1u << 16)) {
    TIFFClose(tif);
    throw ImageDecodeError("TIFF: unsupported dimensions");
  }
  std::vector<std::uint32_t> rgba(static_cast<std::size_t>(w) * h);
  if (!TIFFReadRGBAImageOriented(tif, w, h, rgba.data(), ORIENTATION_TOPLEFT, 0)) {
    TIFFClose(tif);
    throw ImageDecodeError("TIFF: cannot decode");
  }
  TIFFClose(tif);
  const bool gray = photometric == PHOTOMETRIC_MINISBLACK || photometric == PHOTOMETRIC_MINISWHITE;
  Raster out(static_cast<int>(w), static_cast<int>(h), gray ? 1 : 3);
  auto px = out.pixels();
  for (std::size_t i = 0; i < rgba.size(); ++i) {
    const std::uint32_t p = rgba[i];
    if (gray) {
      px[i] = static_cast<std::uint8_t>(TIFFGetR(p));
    } else {
      px[3 * i] = static_cast<std::uint8_t>(TIFFGetR(p));
      px[3 * i + 1] = static_cast<std::uint8_t>(TIFFGetG(p));
      px[3 * i + 2] = static_cast<std::uint8_t>(TIFFGetB(p));
    }
  }
  return out;
}

}  // namespace

Raster decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPng[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPng, kPng + 8, bytes.begin())) return decode_png(bytes);
  if (bytes.size() >= 4 && ((bytes[0] == 'I' && bytes[1] == 'I' && bytes[2] == 42 && bytes[3] == 0) ||
                            (bytes[0] == 'M' && bytes[1] == 'M' && bytes[2] == 0 && bytes[3] == 42))) {
    return decode_tiff(bytes);
  }
  throw ImageDecodeError("unrecognised image format");
}

Raster read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageDecodeError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const Raster& img) {
  if (img.channels() != 1 && img.channels() != 3) throw std::invalid_argument("encode_png: 1 or 3 channels required");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.pixels().data(), 0, nullptr)) {
    throw OutputError(std::string("PNG encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.pixels().data(), 0, nullptr)) {
    throw OutputError(std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

void write_tiff(const fs::path& path, const Raster& img) {
  TIFF* tif = TIFFOpen(path.string().c_str(), "w");
  if (!tif) throw OutputError("cannot write " + path.string());
  TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.width()));
  TIFFSetField(tif, TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.height()));
  TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(img.channels()));
  TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(8));
  TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif, TIFFTAG_PHOTOMETRIC, img.channels() == 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif, TIFFTAG_ROWSPERSTRIP, static_cast<std::uint32_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    if (TIFFWriteScanline(tif, const_cast<std::uint8_t*>(img.row(y)), static_cast<std::uint32_t>(y), 0) < 0) {
      TIFFClose(tif);
      throw OutputError("cannot write " + path.string());
    }
  }
  TIFFClose(tif);
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw OutputError("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError("cannot rename into " + path.string());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Raster mask_to_raster(const BinaryMask& mask) {
  Raster out(mask.width(), mask.height(), 1);
  auto px = out.pixels();
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) px[i] = bits[i] ? 255 : 0;
  return out;
}

BinaryMask raster_to_mask(const Raster& img) {
  BinaryMask out(img.width(), img.height());
  auto bits = out.bits();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool on = false;
      for (int c = 0; c < img.channels(); ++c) on = on || img.at(x, y, c) != 0;
      bits[static_cast<std::size_t>(y) * img.width() + x] = on ? 1 : 0;
    }
  }
  return out;
}

}  // namespace palynseg
