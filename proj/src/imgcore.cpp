#include "palynseg/imgcore.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>

namespace palynseg {

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("BinaryMask: dimensions must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void BinaryMask::require_same(const BinaryMask& o) const {
  if (o.width_ != width_ || o.height_ != height_) {
    throw std::invalid_argument("BinaryMask: dimension mismatch");
  }
}

BinaryMask BinaryMask::operator~() const {
  BinaryMask out = *this;
  for (auto& b : out.bits_) b ^= 1;
  return out;
}

BinaryMask BinaryMask::operator&(const BinaryMask& o) const {
  require_same(o);
  BinaryMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] &= o.bits_[i];
  return out;
}

BinaryMask BinaryMask::operator|(const BinaryMask& o) const {
  require_same(o);
  BinaryMask out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] |= o.bits_[i];
  return out;
}

bool BinaryMask::subset_of(const BinaryMask& o) const {
  require_same(o);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !o.bits_[i]) return false;
  }
  return true;
}

double Contour::length() const {
  const std::size_t n = points.size();
  if (n < 2) return 0.0;
  double len = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = points[i];
    const Point2& b = points[(i + 1) % n];
    if (!closed && i + 1 == n) break;
    len += std::hypot(b.x - a.x, b.y - a.y);
  }
  return len;
}

double Contour::signed_area() const {
  const std::size_t n = points.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = points[i];
    const Point2& b = points[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

Contour Contour::translated(double dx, double dy) const {
  Contour out = *this;
  for (auto& p : out.points) {
    p.x += dx;
    p.y += dy;
  }
  return out;
}

Contour Contour::reversed() const {
  Contour out = *this;
  std::reverse(out.points.begin(), out.points.end());
  return out;
}

void Contour::dedupe() {
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  points = std::move(out);
}

Raster to_grayscale(const Raster& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) {
    throw std::invalid_argument("to_grayscale: expected 1 or 3 channels");
  }
  Raster out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
  }
  return out;
}

Labeling connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Labeling out{Image<int>(w, h, 1, 0), {}};
  std::vector<Pixel> stack;

  static constexpr int kDx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int nbrs = connectivity == Connectivity::Eight ? 8 : 4;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || out.labels.at(x, y) != 0) continue;
      const int label = static_cast<int>(out.components.size()) + 1;
      Component comp{{}, BBox{x, y, x, y}};
      out.labels.at(x, y) = label;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.pixels.push_back(p);
        comp.bbox.x0 = std::min(comp.bbox.x0, p.x);
        comp.bbox.x1 = std::max(comp.bbox.x1, p.x);
        comp.bbox.y0 = std::min(comp.bbox.y0, p.y);
        comp.bbox.y1 = std::max(comp.bbox.y1, p.y);
        for (int k = 0; k < nbrs; ++k) {
          const int nx = p.x + kDx8[k];
          const int ny = p.y + kDy8[k];
          if (mask.get_or_false(nx, ny) && out.labels.at(nx, ny) == 0) {
            out.labels.at(nx, ny) = label;
            stack.push_back({nx, ny});
          }
        }
      }
      std::sort(comp.pixels.begin(), comp.pixels.end(),
                [](const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      out.components.push_back(std::move(comp));
    }
  }
  return out;
}

std::optional<BBox> mask_bounds(const BinaryMask& mask) {
  std::optional<BBox> box;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      if (!box) {
        box = BBox{x, y, x, y};
      } else {
        box->x0 = std::min(box->x0, x);
        box->x1 = std::max(box->x1, x);
        box->y0 = std::min(box->y0, y);
        box->y1 = std::max(box->y1, y);
      }
    }
  }
  return box;
}

RegionStats region_stats(std::span<const Pixel> component, const Raster& gray) {
  if (component.empty()) {
    throw std::invalid_argument("region_stats: empty component");
  }
  if (gray.channels() != 1) {
    throw std::invalid_argument("region_stats: expected a 1-channel raster");
  }
  RegionStats s;
  s.area = component.size();
  s.bbox = BBox{component[0].x, component[0].y, component[0].x, component[0].y};

  double sum = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (const Pixel& p : component) {
    if (!gray.contains(p.x, p.y)) {
      throw std::out_of_range("region_stats: pixel outside raster");
    }
    sum += gray.at(p.x, p.y);
    cx += p.x;
    cy += p.y;
    s.bbox.x0 = std::min(s.bbox.x0, p.x);
    s.bbox.x1 = std::max(s.bbox.x1, p.x);
    s.bbox.y0 = std::min(s.bbox.y0, p.y);
    s.bbox.y1 = std::max(s.bbox.y1, p.y);
  }
  const double n = static_cast<double>(s.area);
  s.mean_intensity = sum / n;
  s.centroid = {cx / n, cy / n};

  double var = 0.0;
  double mxx = 0.0;
  double myy = 0.0;
  double mxy = 0.0;
  for (const Pixel& p : component) {
    const double d = gray.at(p.x, p.y) - s.mean_intensity;
    var += d * d;
    const double dx = p.x - s.centroid.x;
    const double dy = p.y - s.centroid.y;
    mxx += dx * dx;
    myy += dy * dy;
    mxy += dx * dy;
  }
  s.intensity_sd = std::sqrt(var / n);

  // Eigenvalues of the 2x2 second-moment matrix.
  const double tr = (mxx + myy) / n;
  const double det = (mxx * myy - mxy * mxy) / (n * n);
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double l1 = tr / 2.0 + disc;
  const double l2 = tr / 2.0 - disc;
  if (l1 > 0.0) s.elongation = l2 > 1e-12 ? std::sqrt(l1 / l2) : 1e6;

  s.touches_border = s.bbox.x0 == 0 || s.bbox.y0 == 0 || s.bbox.x1 == gray.width() - 1 ||
                     s.bbox.y1 == gray.height() - 1;

  s.equiv_radius = std::sqrt(n / std::numbers::pi);

  // Indicator of the component over its bbox; the trace pads with background.
  BinaryMask local(s.bbox.width(), s.bbox.height());
  for (const Pixel& p : component) local.set(p.x - s.bbox.x0, p.y - s.bbox.y0);
  s.perimeter = outer_boundary(local).length();
  return s;
}

BBox expand_clamped(const BBox& bbox, int margin, int width, int height) {
  if (bbox.x1 < 0 || bbox.y1 < 0 || bbox.x0 >= width || bbox.y0 >= height || bbox.x1 < bbox.x0 ||
      bbox.y1 < bbox.y0) {
    throw EmptyIntersection();
  }
  return BBox{std::max(0, bbox.x0 - margin), std::max(0, bbox.y0 - margin),
              std::min(width - 1, bbox.x1 + margin), std::min(height - 1, bbox.y1 + margin)};
}

CroppedMask crop_mask(const BinaryMask& mask, const BBox& bbox, int margin) {
  const BBox r = expand_clamped(bbox, margin, mask.width(), mask.height());
  CroppedMask out{BinaryMask(r.width(), r.height()), r.x0, r.y0};
  for (int y = 0; y < r.height(); ++y) {
    for (int x = 0; x < r.width(); ++x) {
      if (mask.get(r.x0 + x, r.y0 + y)) out.mask.set(x, y);
    }
  }
  return out;
}

std::vector<Pixel> mask_pixels(const BinaryMask& mask) {
  std::vector<Pixel> out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.get(x, y)) out.push_back({x, y});
    }
  }
  return out;
}

BinaryMask mask_from_pixels(std::span<const Pixel> pixels, int width, int height) {
  BinaryMask out(width, height);
  for (const Pixel& p : pixels) {
    if (out.contains(p.x, p.y)) out.set(p.x, p.y);
  }
  return out;
}

}  // namespace palynseg
