#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "palynseg/imgcore.hpp"
#include "palynseg/snake.hpp"

namespace testutil {

using namespace palynseg;

inline BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y);
    }
  }
  return m;
}

// Total length of the level-0.5 iso-lines, summed cell by cell. Every crossing
// sits at an edge midpoint, so a corner cut is sqrt(0.5) long and a straight
// run across the cell is 1.
inline double marching_squares_length(const BinaryMask& m) {
  double len = 0.0;
  for (int y = -1; y < m.height(); ++y) {
    for (int x = -1; x < m.width(); ++x) {
      const int a = m.get_or_false(x, y), b = m.get_or_false(x + 1, y);
      const int c = m.get_or_false(x + 1, y + 1), d = m.get_or_false(x, y + 1);
      const int n = a + b + c + d;
      if (n == 1 || n == 3) {
        len += std::sqrt(0.5);
      } else if (n == 2) {
        len += (a == c) ? 2.0 * std::sqrt(0.5) : 1.0;
      }
    }
  }
  return len;
}

inline Raster fill_mask(const BinaryMask& m, std::uint8_t fg, std::uint8_t bg) {
  Raster r(m.width(), m.height(), 1, bg);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.get(x, y)) r.at(x, y) = fg;
    }
  }
  return r;
}

/// Random mask made of a few random disks and rectangles plus salt noise.
inline BinaryMask random_mask(std::mt19937_64& rng, int w, int h) {
  BinaryMask m(w, h);
  std::uniform_int_distribution<int> nshape(1, 6);
  std::uniform_real_distribution<double> ux(0.0, w - 1.0), uy(0.0, h - 1.0), ur(1.0, std::min(w, h) / 4.0);
  std::bernoulli_distribution coin(0.5);
  const int n = nshape(rng);
  for (int i = 0; i < n; ++i) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng);
    const bool disk = coin(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool in = disk ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                             : std::abs(x - cx) <= r && std::abs(y - cy) <= r / 2;
        if (in) m.set(x, y);
      }
    }
  }
  std::bernoulli_distribution salt(0.02);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (salt(rng)) m.set(x, y, !m.get(x, y));
    }
  }
  return m;
}

inline Contour circle(double cx, double cy, double r, int n) {
  Contour c;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    c.points.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return c;
}

inline double rms_radius_error(const Contour& c, double cx, double cy, double r, double* max_err = nullptr) {
  double acc = 0.0, mx = 0.0;
  for (const auto& p : c.points) {
    const double e = std::hypot(p.x - cx, p.y - cy) - r;
    acc += e * e;
    mx = std::max(mx, std::abs(e));
  }
  if (max_err) *max_err = mx;
  return std::sqrt(acc / c.size());
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("palynseg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
