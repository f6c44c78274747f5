#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "palynseg/phantom.hpp"
#include "palynseg/preproc.hpp"

using namespace palynseg;

namespace {

double region_sd(const Raster& r, int x0, int x1) {
  double s = 0, s2 = 0;
  int n = 0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = x0; x < x1; ++x) {
      const double v = r.at(x, y);
      s += v, s2 += v * v, ++n;
    }
  }
  const double m = s / n;
  return std::sqrt(std::max(0.0, s2 / n - m * m));
}

double region_sd(const RealImage& r, int x0, int x1) {
  double s = 0, s2 = 0;
  int n = 0;
  for (int y = 0; y < r.height(); ++y) {
    for (int x = x0; x < x1; ++x) {
      const double v = r.at(x, y);
      s += v, s2 += v * v, ++n;
    }
  }
  const double m = s / n;
  return std::sqrt(std::max(0.0, s2 / n - m * m));
}

double entropy(const Raster& r) {
  std::array<double, 256> h{};
  for (auto v : r.pixels()) h[v] += 1;
  double e = 0;
  for (double c : h) {
    if (c > 0) e -= c / r.size() * std::log2(c / r.size());
  }
  return e;
}

Raster global_equalize(const Raster& r) {
  std::array<double, 256> h{};
  for (auto v : r.pixels()) h[v] += 1;
  std::array<std::uint8_t, 256> lut{};
  double c = 0;
  for (int i = 0; i < 256; ++i) {
    c += h[i];
    lut[i] = static_cast<std::uint8_t>(std::lround(255.0 * c / r.size()));
  }
  Raster o = r;
  for (auto& v : o.pixels()) v = lut[v];
  return o;
}

Raster random_image(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> u(0, 255);
  Raster r(w, h);
  for (auto& v : r.pixels()) v = static_cast<std::uint8_t>(u(rng));
  return r;
}

double column_mean(const RealImage& r, int x) {
  double s = 0;
  for (int y = 0; y < r.height(); ++y) s += r.at(x, y);
  return s / r.height();
}

}  // namespace

TEST_CASE("PreprocConfig validation") {
  PreprocConfig c;
  CHECK_NOTHROW(c.validate());
  c.clahe_tile = 4;
  CHECK_THROWS(c.validate());
  c = {};
  c.pm_lambda = 0.3;
  CHECK_THROWS(c.validate());
  c = {};
  c.median_radius = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("clahe and median are idempotent on constant images") {
  const PreprocConfig cfg;
  for (const int v : {0, 77, 255}) {
    const Raster img(100, 70, 1, static_cast<std::uint8_t>(v));
    const Raster c = clahe(img, cfg);
    const auto first = c.at(0, 0);
    CHECK(std::all_of(c.pixels().begin(), c.pixels().end(), [&](auto p) { return p == first; }));
    CHECK(clahe(c, cfg) == c);
    CHECK(median_filter(img, 2) == img);
  }
}

TEST_CASE("clahe expands local contrast of a two-tile ramp image") {
  Raster img(128, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) {
      const int t = (x % 64) * 40 / 63 + (y % 8);
      img.at(x, y) = static_cast<std::uint8_t>(x < 64 ? 20 + t : 180 + t);
    }
  }
  PreprocConfig cfg;
  const Raster out = clahe(img, cfg);
  CHECK(region_sd(out, 0, 64) > region_sd(img, 0, 64));
  CHECK(region_sd(out, 64, 128) > region_sd(img, 64, 128));

  // Without clipping, tile-wise equalization beats global equalization.
  cfg.clahe_clip = 100.0;
  const Raster tiles = clahe(img, cfg);
  const Raster global = global_equalize(img);
  CHECK(region_sd(tiles, 0, 64) > region_sd(global, 0, 64));
  CHECK(region_sd(tiles, 64, 128) > region_sd(global, 64, 128));
}

TEST_CASE("clahe raises histogram entropy of a phantom image") {
  PhantomSpec s;
  s.width = s.height = 256;
  PhantomGrain g;
  g.center = {128, 128};
  s.grains.push_back(g);
  const Raster img = generate(s).image;
  CHECK(entropy(clahe(img, PreprocConfig{})) > entropy(img));
}

TEST_CASE("median_filter removes salt and matches a brute-force window sort") {
  Raster salt(9, 9, 1, 0);
  salt.at(4, 4) = 255;
  CHECK(median_filter(salt, 1) == Raster(9, 9, 1, 0));

  std::mt19937_64 rng(3);
  const Raster img = random_image(rng, 32, 32);
  for (const int r : {1, 2}) {
    const Raster out = median_filter(img, r);
    bool same = true;
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        std::vector<int> w;
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) w.push_back(img.clamped(x + dx, y + dy));
        }
        std::sort(w.begin(), w.end());
        same = same && out.at(x, y) == w[w.size() / 2];
      }
    }
    CHECK(same);
  }
}

TEST_CASE("anisotropic_diffuse keeps constants, the mean and the range") {
  const PreprocConfig cfg;
  const Raster flat(40, 30, 1, 90);
  const RealImage d = anisotropic_diffuse(flat, cfg);
  CHECK(std::all_of(d.pixels().begin(), d.pixels().end(), [](double v) { return v == 90.0; }));

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Raster img = random_image(rng, 48, 40);
    const RealImage out = anisotropic_diffuse(img, cfg);
    double in_mean = 0, out_mean = 0;
    for (auto v : img.pixels()) in_mean += v;
    for (auto v : out.pixels()) out_mean += v;
    in_mean /= img.size();
    out_mean /= out.size();
    CHECK(std::abs(in_mean - out_mean) < 0.5);
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    CHECK(*std::min_element(out.pixels().begin(), out.pixels().end()) >= *lo);
    CHECK(*std::max_element(out.pixels().begin(), out.pixels().end()) <= *hi);
  }
}

TEST_CASE("anisotropic_diffuse preserves a strong step and smooths noise") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 10.0);
  RealImage img(128, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) img.at(x, y) = (x < 64 ? 20.0 : 220.0) + noise(rng);
  }
  const PreprocConfig cfg;  // kappa 30, 15 iterations
  const RealImage out = anisotropic_diffuse(img, cfg);
  CHECK(column_mean(out, 64) - column_mean(out, 63) >= 0.9 * 200.0);
  CHECK(region_sd(out, 0, 50) <= 0.5 * region_sd(img, 0, 50));
  CHECK(region_sd(out, 78, 128) <= 0.5 * region_sd(img, 78, 128));
}

TEST_CASE("sobel on constant and step images") {
  const PreprocConfig cfg;
  const SobelResult flat = sobel_edges(RealImage(20, 20, 1, 50.0), cfg);
  CHECK(std::all_of(flat.magnitude.pixels().begin(), flat.magnitude.pixels().end(), [](double v) { return v == 0; }));
  CHECK(flat.edges.none());

  RealImage step(20, 20, 1, 10.0);
  for (int y = 0; y < 20; ++y) {
    for (int x = 10; x < 20; ++x) step.at(x, y) = 110.0;
  }
  const SobelResult s = sobel_edges(step, cfg);
  const double peak = *std::max_element(s.magnitude.pixels().begin(), s.magnitude.pixels().end());
  CHECK(peak == doctest::Approx(400.0));  // |Gx| = (1 + 2 + 1) * 100, Gy = 0
  for (int y = 1; y < 19; ++y) {
    CHECK(s.magnitude.at(9, y) == doctest::Approx(400.0));
    CHECK(s.magnitude.at(10, y) == doctest::Approx(400.0));
    CHECK(s.magnitude.at(5, y) == 0.0);
  }
  CHECK(s.edges.get(9, 5));
  CHECK_FALSE(s.edges.get(3, 5));
}

TEST_CASE("sobel edges of a textured ring stay on the ring") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> tex(40, 120);
  const int n = 160;
  const double c = 80.0, r_in = 45.0, r_out = 60.0;
  RealImage img(n, n, 1, 200.0);
  for (int y = 0; y < n; y += 2) {
    for (int x = 0; x < n; x += 2) {
      const double v = tex(rng);
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const double d = std::hypot(x + dx - c, y + dy - c);
          if (d <= r_out && d > r_in) img.at(x + dx, y + dy) = v;
          if (d <= r_in) img.at(x + dx, y + dy) = 150.0;
        }
      }
    }
  }
  const SobelResult s = sobel_edges(img, PreprocConfig{});
  std::size_t total = 0, inside = 0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      if (!s.edges.get(x, y)) continue;
      ++total;
      const double d = std::hypot(x - c, y - c);
      if (d >= r_in - 2 && d <= r_out + 2) ++inside;
    }
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(inside) / total > 0.8);

  RealImage shifted = img;
  for (auto& v : shifted.pixels()) v += 37.0;
  CHECK(sobel_edges(shifted, PreprocConfig{}).edges == s.edges);
}

TEST_CASE("fixed sobel threshold") {
  PreprocConfig cfg;
  cfg.sobel_threshold_mode = ThresholdMode::Fixed;
  cfg.sobel_fixed_threshold = 399.0;
  RealImage step(20, 20, 1, 10.0);
  for (int y = 0; y < 20; ++y) {
    for (int x = 10; x < 20; ++x) step.at(x, y) = 110.0;
  }
  const SobelResult s = sobel_edges(step, cfg);
  CHECK(s.threshold == 399.0);
  CHECK(s.edges.count() == 40);
}

TEST_CASE("gradient_energy normalisation and rim concentration") {
  CHECK(std::all_of(gradient_energy(Raster(16, 16, 1, 9)).pixels().begin(),
                    gradient_energy(Raster(16, 16, 1, 9)).pixels().end(), [](double v) { return v == 0.0; }));

  const double c = 80.3, r = 50.0;
  const Raster disk = testutil::fill_mask(testutil::disk_mask(160, 160, c, c, r), 60, 200);
  const RealImage e = gradient_energy(disk);
  CHECK(*std::max_element(e.pixels().begin(), e.pixels().end()) == doctest::Approx(1.0));

  std::vector<double> values(e.pixels().begin(), e.pixels().end());
  std::sort(values.begin(), values.end());
  const double p99 = values[values.size() * 99 / 100];
  std::size_t top = 0, near = 0;
  for (int y = 0; y < 160; ++y) {
    for (int x = 0; x < 160; ++x) {
      if (e.at(x, y) < p99 || e.at(x, y) == 0.0) continue;
      ++top;
      if (std::abs(std::hypot(x - c, y - c) - r) <= 2.0) ++near;
    }
  }
  REQUIRE(top > 0);
  CHECK(static_cast<double>(near) / top >= 0.9);

  Raster brighter = disk;
  for (auto& v : brighter.pixels()) v = static_cast<std::uint8_t>(v + 20);
  CHECK(gradient_energy(brighter) == e);
}

TEST_CASE("otsu_split separates a bimodal sample") {
  std::vector<double> v(100, 1.0);
  v.insert(v.end(), 100, 9.0);
  const OtsuSplit s = otsu_split(v);
  CHECK_FALSE(s.above(1.0));
  CHECK(s.above(9.0));
  const std::vector<double> zeros(10, 0.0);
  CHECK_FALSE(otsu_split(zeros).above(0.0));
}
