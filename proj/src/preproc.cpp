#include "palynseg/preproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace palynseg {

void PreprocConfig::validate() const {
  if (clahe_tile < 8) throw std::invalid_argument("preproc.clahe_tile must be >= 8");
  if (!(clahe_clip > 0.0)) throw std::invalid_argument("preproc.clahe_clip must be > 0");
  if (median_radius < 1) throw std::invalid_argument("preproc.median_radius must be >= 1");
  if (pm_iterations < 1) throw std::invalid_argument("preproc.pm_iterations must be >= 1");
  if (!(pm_kappa > 0.0)) throw std::invalid_argument("preproc.pm_kappa must be > 0");
  if (!(pm_lambda > 0.0 && pm_lambda <= 0.25)) {
    throw std::invalid_argument("preproc.pm_lambda must be in (0, 0.25]");
  }
  if (sobel_fixed_threshold < 0.0) {
    throw std::invalid_argument("preproc.sobel_fixed_threshold must be >= 0");
  }
}

namespace {

void require_gray(const Raster& img, const char* what) {
  if (img.channels() != 1) throw std::invalid_argument(std::string(what) + ": expected 1 channel");
}

using Lut = std::array<double, 256>;

Lut tile_lut(const Raster& img, int x0, int x1, int y0, int y1, double clip_factor) {
  std::array<double, 256> hist{};
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* row = img.row(y);
    for (int x = x0; x < x1; ++x) hist[row[x]] += 1.0;
  }
  const double area = static_cast<double>(x1 - x0) * (y1 - y0);
  Lut lut;
  const auto occupied = std::count_if(hist.begin(), hist.end(), [](double h) { return h > 0.0; });
  if (occupied <= 1) {
    // A flat tile carries no contrast to redistribute.
    for (int v = 0; v < 256; ++v) lut[v] = v;
    return lut;
  }
  const double clip = std::max(1.0, clip_factor * area / 256.0);
  double excess = 0.0;
  for (double& h : hist) {
    if (h > clip) {
      excess += h - clip;
      h = clip;
    }
  }
  const double bonus = excess / 256.0;
  double cdf = 0.0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v] + bonus;
    lut[v] = 255.0 * cdf / area;
  }
  return lut;
}

// Tile boundaries splitting `extent` into `n` near-equal spans.
std::vector<int> tile_edges(int extent, int n) {
  std::vector<int> e(n + 1);
  for (int i = 0; i <= n; ++i) e[i] = static_cast<int>(static_cast<long>(i) * extent / n);
  return e;
}

struct Interp {
  int lo = 0;
  int hi = 0;
  double w = 0.0;  // weight of hi
};

std::vector<Interp> interp_table(int extent, const std::vector<int>& edges) {
  const int n = static_cast<int>(edges.size()) - 1;
  std::vector<double> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = (edges[i] + edges[i + 1] - 1) / 2.0;
  std::vector<Interp> t(extent);
  for (int p = 0; p < extent; ++p) {
    if (p <= centers.front()) {
      t[p] = {0, 0, 0.0};
    } else if (p >= centers.back()) {
      t[p] = {n - 1, n - 1, 0.0};
    } else {
      int i = 0;
      while (centers[i + 1] < p) ++i;
      t[p] = {i, i + 1, (p - centers[i]) / (centers[i + 1] - centers[i])};
    }
  }
  return t;
}

}  // namespace

Raster clahe(const Raster& img, const PreprocConfig& cfg) {
  require_gray(img, "clahe");
  const int w = img.width();
  const int h = img.height();
  const int nx = std::max(1, w / cfg.clahe_tile);
  const int ny = std::max(1, h / cfg.clahe_tile);
  const auto ex = tile_edges(w, nx);
  const auto ey = tile_edges(h, ny);

  std::vector<Lut> luts(static_cast<std::size_t>(nx) * ny);
  for (int ty = 0; ty < ny; ++ty) {
    for (int tx = 0; tx < nx; ++tx) {
      luts[ty * nx + tx] = tile_lut(img, ex[tx], ex[tx + 1], ey[ty], ey[ty + 1], cfg.clahe_clip);
    }
  }

  const auto ix = interp_table(w, ex);
  const auto iy = interp_table(h, ey);
  Raster out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const Interp& a = iy[y];
    for (int x = 0; x < w; ++x) {
      const Interp& b = ix[x];
      const int v = img.at(x, y);
      const double top = (1.0 - b.w) * luts[a.lo * nx + b.lo][v] + b.w * luts[a.lo * nx + b.hi][v];
      const double bot = (1.0 - b.w) * luts[a.hi * nx + b.lo][v] + b.w * luts[a.hi * nx + b.hi][v];
      const double val = (1.0 - a.w) * top + a.w * bot;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
    }
  }
  return out;
}

Raster median_filter(const Raster& img, int radius) {
  require_gray(img, "median_filter");
  if (radius < 1) throw std::invalid_argument("median_filter: radius must be >= 1");
  const int w = img.width();
  const int h = img.height();
  const int side = 2 * radius + 1;
  std::vector<std::uint8_t> window(static_cast<std::size_t>(side) * side);
  const auto mid = window.begin() + static_cast<long>(window.size() / 2);
  Raster out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const bool inner_y = y >= radius && y < h - radius;
    for (int x = 0; x < w; ++x) {
      auto it = window.begin();
      if (inner_y && x >= radius && x < w - radius) {
        for (int dy = -radius; dy <= radius; ++dy) {
          const std::uint8_t* row = img.row(y + dy);
          it = std::copy(row + x - radius, row + x + radius + 1, it);
        }
      } else {
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) *it++ = img.clamped(x + dx, y + dy);
        }
      }
      std::nth_element(window.begin(), mid, window.end());
      out.at(x, y) = *mid;
    }
  }
  return out;
}

RealImage to_real(const Raster& img) {
  RealImage out(img.width(), img.height(), img.channels());
  std::copy(img.pixels().begin(), img.pixels().end(), out.pixels().begin());
  return out;
}

RealImage anisotropic_diffuse(const RealImage& img, const PreprocConfig& cfg) {
  cfg.validate();
  if (img.channels() != 1) throw std::invalid_argument("anisotropic_diffuse: expected 1 channel");
  const int w = img.width();
  const int h = img.height();
  const double inv_k2 = 1.0 / (cfg.pm_kappa * cfg.pm_kappa);
  auto flux = [inv_k2](double d) { return std::exp(-d * d * inv_k2) * d; };

  RealImage cur = img;
  RealImage next(w, h, 1);
  for (int it = 0; it < cfg.pm_iterations; ++it) {
    for (int y = 0; y < h; ++y) {
      const double* r = cur.row(y);
      const double* up = cur.row(y > 0 ? y - 1 : y);
      const double* dn = cur.row(y < h - 1 ? y + 1 : y);
      double* o = next.row(y);
      for (int x = 0; x < w; ++x) {
        const double c = r[x];
        const double e = r[x < w - 1 ? x + 1 : x] - c;
        const double wv = r[x > 0 ? x - 1 : x] - c;
        const double n = up[x] - c;
        const double s = dn[x] - c;
        o[x] = c + cfg.pm_lambda * (flux(n) + flux(s) + flux(e) + flux(wv));
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

RealImage anisotropic_diffuse(const Raster& img, const PreprocConfig& cfg) {
  return anisotropic_diffuse(to_real(img), cfg);
}

RealImage sobel_magnitude(const RealImage& img) {
  if (img.channels() != 1) throw std::invalid_argument("sobel: expected 1 channel");
  const int w = img.width();
  const int h = img.height();
  RealImage mag(w, h, 1);
  for (int y = 0; y < h; ++y) {
    const double* up = img.row(y > 0 ? y - 1 : y);
    const double* r = img.row(y);
    const double* dn = img.row(y < h - 1 ? y + 1 : y);
    for (int x = 0; x < w; ++x) {
      const int xl = x > 0 ? x - 1 : x;
      const int xr = x < w - 1 ? x + 1 : x;
      const double gx = (up[xr] + 2.0 * r[xr] + dn[xr]) - (up[xl] + 2.0 * r[xl] + dn[xl]);
      const double gy = (dn[xl] + 2.0 * dn[x] + dn[xr]) - (up[xl] + 2.0 * up[x] + up[xr]);
      mag.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return mag;
}

bool OtsuSplit::above(double v) const {
  if (!(bin_width > 0.0)) return false;
  const int b = std::min(255, static_cast<int>(v / bin_width));
  return b > bin;
}

OtsuSplit otsu_split(std::span<const double> values) {
  OtsuSplit split;
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, v);
  if (!(vmax > 0.0)) return split;
  split.bin_width = vmax / 256.0;
  std::array<double, 256> hist{};
  for (double v : values) hist[std::min(255, static_cast<int>(v / split.bin_width))] += 1.0;

  double total = 0.0;
  double sum = 0.0;
  for (int b = 0; b < 256; ++b) {
    total += hist[b];
    sum += b * hist[b];
  }
  double w0 = 0.0;
  double s0 = 0.0;
  double best = -1.0;
  for (int b = 0; b < 255; ++b) {
    w0 += hist[b];
    s0 += b * hist[b];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = s0 / w0;
    const double m1 = (sum - s0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      split.bin = b;
    }
  }
  return split;
}

SobelResult sobel_edges(const RealImage& img, const PreprocConfig& cfg) {
  SobelResult out{sobel_magnitude(img), BinaryMask(img.width(), img.height()), 0.0};
  const auto mag = out.magnitude.pixels();
  auto bits = out.edges.bits();
  if (cfg.sobel_threshold_mode == ThresholdMode::Otsu) {
    const OtsuSplit split = otsu_split(mag);
    out.threshold = (split.bin + 1) * split.bin_width;
    for (std::size_t i = 0; i < mag.size(); ++i) bits[i] = split.above(mag[i]) ? 1 : 0;
  } else {
    out.threshold = cfg.sobel_fixed_threshold;
    for (std::size_t i = 0; i < mag.size(); ++i) bits[i] = mag[i] > out.threshold ? 1 : 0;
  }
  return out;
}

RealImage gradient_energy(const RealImage& img) {
  RealImage mag = sobel_magnitude(img);
  double vmax = 0.0;
  for (double v : mag.pixels()) vmax = std::max(vmax, v);
  if (vmax > 0.0) {
    for (double& v : mag.pixels()) v /= vmax;
  }
  return mag;
}

RealImage gradient_energy(const Raster& img) { return gradient_energy(to_real(img)); }

}  // namespace palynseg
