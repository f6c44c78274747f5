#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace palynseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyIntersection : public Error {
 public:
  EmptyIntersection() : Error("bounding box does not intersect the image") {}
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty input mask") {}
};

/// Row-major pixel grid with 1 or more interleaved channels.
template <typename T>
class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1) {
      throw std::invalid_argument("Image: dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  T& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  const T& at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  /// Edge-replicated read.
  const T& clamped(int x, int y, int c = 0) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return data_[index(x, y, c)];
  }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }
  T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
  const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using Raster = Image<std::uint8_t>;
using RealImage = Image<double>;

/// Foreground flags aligned to a raster. Stored one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty_dims() const { return bits_.empty(); }

  bool get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  /// Out-of-bounds reads are background.
  bool get_or_false(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t count() const;
  bool none() const { return count() == 0; }

  std::span<std::uint8_t> bits() { return bits_; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  BinaryMask operator~() const;
  BinaryMask operator&(const BinaryMask& o) const;
  BinaryMask operator|(const BinaryMask& o) const;
  bool operator==(const BinaryMask&) const = default;

  /// True iff every foreground pixel of *this is foreground in `o`.
  bool subset_of(const BinaryMask& o) const;

 private:
  void require_same(const BinaryMask& o) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Pixel {
  int x = 0;
  int y = 0;
  bool operator==(const Pixel&) const = default;
};

/// Inclusive pixel bounding box.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  bool operator==(const BBox&) const = default;
};

/// Closed polyline of subpixel points. Pixel (x, y) has its center at (x, y).
struct Contour {
  std::vector<Point2> points;
  bool closed = true;

  std::size_t size() const { return points.size(); }
  double length() const;
  /// Shoelace area in image coordinates (y down). Negative for loops that run
  /// counterclockwise as displayed.
  double signed_area() const;
  Contour translated(double dx, double dy) const;
  Contour reversed() const;
  /// Removes consecutive (and wrap-around) duplicate points.
  void dedupe();
};

struct RegionStats {
  std::size_t area = 0;
  double perimeter = 0.0;
  double equiv_radius = 0.0;
  double mean_intensity = 0.0;
  double intensity_sd = 0.0;
  Point2 centroid;
  BBox bbox;
  bool touches_border = false;
  /// Ratio of the principal second moments (>= 1); 1 for an ideal disk.
  double elongation = 1.0;

  /// perimeter / (2 * equiv_radius), equal to pi for an ideal disk.
  double circularity() const { return perimeter / (2.0 * equiv_radius); }
};

enum class Connectivity { Four = 4, Eight = 8 };

struct Component {
  std::vector<Pixel> pixels;
  BBox bbox;
};

struct Labeling {
  /// 0 = background, component i has label i + 1.
  Image<int> labels;
  std::vector<Component> components;
};

Raster to_grayscale(const Raster& img);

Labeling connected_components(const BinaryMask& mask, Connectivity connectivity);

/// Statistics of a pixel set over a 1-channel raster. The component must be
/// non-empty and inside `gray`.
RegionStats region_stats(std::span<const Pixel> component, const Raster& gray);

std::optional<BBox> mask_bounds(const BinaryMask& mask);

/// Marching-squares boundary loops of the foreground at level 0.5. Diagonal
/// (saddle) configurations connect the foreground, matching 8-connectivity.
/// Loops run counterclockwise as displayed; the start point is the topmost,
/// leftmost crossing. Points may lie half a pixel outside the mask grid.
std::vector<Contour> trace_boundaries(const BinaryMask& mask);

/// The boundary loop enclosing the largest area; empty contour if the mask has
/// no foreground.
Contour outer_boundary(const BinaryMask& mask);

template <typename T>
struct Cropped {
  Image<T> image;
  int offset_x = 0;
  int offset_y = 0;
};

/// bbox expanded by `margin` and clamped to the image.
BBox expand_clamped(const BBox& bbox, int margin, int width, int height);

template <typename T>
Cropped<T> crop(const Image<T>& img, const BBox& bbox, int margin) {
  const BBox r = expand_clamped(bbox, margin, img.width(), img.height());
  Cropped<T> out{Image<T>(r.width(), r.height(), img.channels()), r.x0, r.y0};
  const std::size_t run = static_cast<std::size_t>(r.width()) * img.channels();
  for (int y = 0; y < r.height(); ++y) {
    const T* src = img.row(r.y0 + y) + static_cast<std::size_t>(r.x0) * img.channels();
    std::copy(src, src + run, out.image.row(y));
  }
  return out;
}

struct CroppedMask {
  BinaryMask mask;
  int offset_x = 0;
  int offset_y = 0;
};

CroppedMask crop_mask(const BinaryMask& mask, const BBox& bbox, int margin);

/// Pixel set of a mask, row-major order.
std::vector<Pixel> mask_pixels(const BinaryMask& mask);

BinaryMask mask_from_pixels(std::span<const Pixel> pixels, int width, int height);

}  // namespace palynseg
