#include "palynseg/morpho.hpp"

#include <limits>

#include <cmath>

namespace palynseg {

DiskSE::DiskSE(int radius) : radius_(radius) {
  if (radius < 1) throw std::invalid_argument("DiskSE: radius must be >= 1");
  half_widths_.resize(2 * radius + 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    int hw = 0;
    while ((hw + 1) * (hw + 1) + dy * dy <= radius * radius) ++hw;
    half_widths_[dy + radius] = hw;
  }
}

std::vector<Pixel> DiskSE::offsets() const {
  std::vector<Pixel> out;
  for (int dy = -radius_; dy <= radius_; ++dy) {
    for (int dx = -half_width(dy); dx <= half_width(dy); ++dx) out.push_back({dx, dy});
  }
  return out;
}

namespace {

// Per-row prefix counts of foreground pixels: prefix[y][x] = count in [0, x).
class RowCounts {
 public:
  explicit RowCounts(const BinaryMask& m) : w_(m.width()), counts_(static_cast<std::size_t>(m.width() + 1) * m.height()) {
    const auto bits = m.bits();
    for (int y = 0; y < m.height(); ++y) {
      int* row = &counts_[static_cast<std::size_t>(y) * (w_ + 1)];
      row[0] = 0;
      for (int x = 0; x < w_; ++x) row[x + 1] = row[x] + bits[static_cast<std::size_t>(y) * w_ + x];
    }
  }

  // Foreground count in row y over [a, b], clipped to the grid.
  int span(int y, int a, int b) const {
    a = std::max(a, 0);
    b = std::min(b, w_ - 1);
    if (a > b) return 0;
    const int* row = &counts_[static_cast<std::size_t>(y) * (w_ + 1)];
    return row[b + 1] - row[a];
  }

 private:
  int w_;
  std::vector<int> counts_;
};

}  // namespace

BinaryMask erode(const BinaryMask& mask, const DiskSE& se) {
  const int w = mask.width();
  const int h = mask.height();
  const int r = se.radius();
  const RowCounts rc(mask);
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y)) continue;
      bool keep = true;
      for (int dy = -r; dy <= r && keep; ++dy) {
        const int yy = y + dy;
        const int hw = se.half_width(dy);
        if (yy < 0 || yy >= h || x - hw < 0 || x + hw >= w) {
          keep = false;
        } else {
          keep = rc.span(yy, x - hw, x + hw) == 2 * hw + 1;
        }
      }
      if (keep) out.set(x, y);
    }
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, const DiskSE& se) {
  const int w = mask.width();
  const int h = mask.height();
  const int r = se.radius();
  const RowCounts rc(mask);
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.get(x, y)) {
        out.set(x, y);
        continue;
      }
      for (int dy = -r; dy <= r; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        const int hw = se.half_width(dy);
        if (rc.span(yy, x - hw, x + hw) > 0) {
          out.set(x, y);
          break;
        }
      }
    }
  }
  return out;
}

BinaryMask open(const BinaryMask& mask, const DiskSE& se) { return dilate(erode(mask, se), se); }

BinaryMask close(const BinaryMask& mask, const DiskSE& se) { return erode(dilate(mask, se), se); }

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask outside(w, h);
  std::vector<Pixel> stack;
  auto seed = [&](int x, int y) {
    if (!mask.get(x, y) && !outside.get(x, y)) {
      outside.set(x, y);
      stack.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    if (p.x > 0) seed(p.x - 1, p.y);
    if (p.x < w - 1) seed(p.x + 1, p.y);
    if (p.y > 0) seed(p.x, p.y - 1);
    if (p.y < h - 1) seed(p.x, p.y + 1);
  }
  return ~outside;
}

std::vector<BinaryMask> erosion_sequence(const BinaryMask& mask, const DiskSE& se) {
  if (mask.none()) throw EmptyInput();
  std::vector<BinaryMask> seq{mask};
  while (!seq.back().none()) seq.push_back(erode(seq.back(), se));
  return seq;
}

namespace {

// Felzenszwalb-Huttenlocher lower envelope of parabolas over one line.
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = f[v[k]] == kInf ? kInf : dq * dq + f[v[k]];
  }
}

}  // namespace

Image<double> squared_distance_to_background(const BinaryMask& mask) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // One ring of padding stands in for everything outside the mask.
  const int w = mask.width() + 2;
  const int h = mask.height() + 2;
  Image<double> g(w, h, 1, 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) g.at(x + 1, y + 1) = mask.get(x, y) ? kInf : 0.0;
  }
  const int n = std::max(w, h);
  std::vector<double> f(n);
  std::vector<double> d(n);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  f.resize(h);
  d.resize(h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = g.at(x, y);
    distance_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) g.at(x, y) = d[y];
  }
  f.resize(w);
  d.resize(w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[x] = g.at(x, y);
    distance_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) g.at(x, y) = d[x];
  }
  Image<double> out(mask.width(), mask.height(), 1, 0.0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) out.at(x, y) = g.at(x + 1, y + 1);
  }
  return out;
}

namespace {

BinaryMask threshold_distance(const Image<double>& d2, double radius) {
  BinaryMask m(d2.width(), d2.height());
  auto bits = m.bits();
  const auto dist = d2.pixels();
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = dist[i] > radius * radius ? 1 : 0;
  return m;
}

}  // namespace

BinaryMask erode_euclidean(const BinaryMask& mask, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("erode_euclidean: radius must be >= 0");
  return threshold_distance(squared_distance_to_background(mask), radius);
}

std::vector<BinaryMask> disk_erosion_sequence(const BinaryMask& mask, double step, double offset) {
  if (!(step > 0.0) || !(offset >= 0.0)) throw std::invalid_argument("disk_erosion_sequence: step must be > 0, offset >= 0");
  if (mask.none()) throw EmptyInput();
  const Image<double> d2 = squared_distance_to_background(mask);
  std::vector<BinaryMask> seq{mask};
  for (int k = 1; !seq.back().none(); ++k) seq.push_back(threshold_distance(d2, k * step + offset));
  return seq;
}

}  // namespace palynseg
