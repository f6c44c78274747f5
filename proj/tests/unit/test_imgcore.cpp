#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "palynseg/imgcore.hpp"

using namespace palynseg;
using testutil::disk_mask;
using testutil::marching_squares_length;

namespace {

// Flood fill from every unvisited foreground pixel.
Image<int> flood_labels(const BinaryMask& m, bool eight) {
  Image<int> lab(m.width(), m.height(), 1, 0);
  int next = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (!m.get(x, y) || lab.at(x, y)) continue;
      ++next;
      std::queue<Pixel> q;
      q.push({x, y});
      lab.at(x, y) = next;
      while (!q.empty()) {
        const Pixel p = q.front();
        q.pop();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (!eight && dx != 0 && dy != 0) continue;
            const int nx = p.x + dx, ny = p.y + dy;
            if (m.get_or_false(nx, ny) && !lab.at(nx, ny)) {
              lab.at(nx, ny) = next;
              q.push({nx, ny});
            }
          }
        }
      }
    }
  }
  return lab;
}

RegionStats stats_of(const BinaryMask& m) {
  const Raster gray(m.width(), m.height(), 1, 100);
  return region_stats(mask_pixels(m), gray);
}

}  // namespace

TEST_CASE("to_grayscale uses BT.601 luma") {
  Raster rgb(3, 1, 3);
  const std::uint8_t px[3][3] = {{255, 255, 255}, {0, 0, 0}, {255, 0, 0}};
  for (int x = 0; x < 3; ++x) {
    for (int c = 0; c < 3; ++c) rgb.at(x, 0, c) = px[x][c];
  }
  const Raster g = to_grayscale(rgb);
  REQUIRE(g.channels() == 1);
  CHECK(g.at(0, 0) == 255);
  CHECK(g.at(1, 0) == 0);
  CHECK(g.at(2, 0) == 76);

  Raster gray(4, 2, 1, 17);
  CHECK(to_grayscale(gray) == gray);
}

TEST_CASE("connected_components on small cases") {
  BinaryMask two(10, 5);
  for (int y = 1; y <= 3; ++y) {
    for (int x = 0; x < 3; ++x) two.set(x, y), two.set(x + 6, y);
  }
  CHECK(connected_components(two, Connectivity::Eight).components.size() == 2);

  BinaryMask diag(4, 4);
  diag.set(0, 0), diag.set(1, 0), diag.set(0, 1), diag.set(1, 1);
  diag.set(2, 2), diag.set(3, 2), diag.set(2, 3), diag.set(3, 3);
  CHECK(connected_components(diag, Connectivity::Four).components.size() == 2);
  CHECK(connected_components(diag, Connectivity::Eight).components.size() == 1);

  CHECK(connected_components(BinaryMask(5, 5), Connectivity::Eight).components.empty());
}

TEST_CASE("connected_components matches a flood-fill oracle on random masks") {
  std::mt19937_64 rng(11);
  std::bernoulli_distribution fg(0.45);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask m(64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) m.set(x, y, fg(rng));
    }
    for (const bool eight : {false, true}) {
      const Labeling lab = connected_components(m, eight ? Connectivity::Eight : Connectivity::Four);
      const Image<int> oracle = flood_labels(m, eight);
      std::map<int, int> fwd, back;
      std::size_t total = 0;
      bool consistent = true;
      for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
          const int a = lab.labels.at(x, y), b = oracle.at(x, y);
          if ((a == 0) != (b == 0)) consistent = false;
          if (a == 0) continue;
          if (fwd.count(a) && fwd[a] != b) consistent = false;
          if (back.count(b) && back[b] != a) consistent = false;
          fwd[a] = b;
          back[b] = a;
        }
      }
      for (const auto& c : lab.components) total += c.pixels.size();
      CHECK(consistent);
      CHECK(total == m.count());
      CHECK(lab.components.size() == back.size());
    }
  }
}

TEST_CASE("region_stats basics") {
  const Raster gray(5, 5, 1, 42);
  const std::vector<Pixel> one{{2, 2}};
  const RegionStats s = region_stats(one, gray);
  CHECK(s.area == 1);
  CHECK(s.intensity_sd == 0.0);
  CHECK(s.mean_intensity == 42.0);
  CHECK(s.perimeter > 0.0);

  Raster two(2, 1, 1);
  two.at(0, 0) = 10;
  two.at(1, 0) = 30;
  const std::vector<Pixel> both{{0, 0}, {1, 0}};
  CHECK(region_stats(both, two).intensity_sd == doctest::Approx(10.0));  // population SD
}

TEST_CASE("region_stats perimeter equals the marching-squares oracle") {
  for (const double r : {5.0, 12.5, 50.0}) {
    const BinaryMask m = disk_mask(130, 130, 64.3, 64.7, r);
    CHECK(stats_of(m).perimeter == doctest::Approx(marching_squares_length(m)).epsilon(1e-9));
  }
  BinaryMask bar(110, 10);
  for (int y = 3; y < 7; ++y) {
    for (int x = 5; x < 105; ++x) bar.set(x, y);
  }
  CHECK(stats_of(bar).perimeter == doctest::Approx(marching_squares_length(bar)).epsilon(1e-9));
}

TEST_CASE("circularity of a rasterized disk and a bar") {
  const RegionStats disk = stats_of(disk_mask(120, 120, 60, 60, 50));
  CHECK(disk.circularity() >= 3.00);
  CHECK(disk.circularity() <= 3.55);

  BinaryMask bar(110, 10);
  for (int y = 3; y < 7; ++y) {
    for (int x = 5; x < 105; ++x) bar.set(x, y);
  }
  const RegionStats s = stats_of(bar);
  // Straight runs of 99 and 3 px plus four sqrt(0.5) corner cuts.
  const double p = 2 * 99 + 2 * 3 + 4 * std::sqrt(0.5);
  const double r = std::sqrt(400.0 / std::numbers::pi);
  CHECK(s.perimeter == doctest::Approx(p));
  CHECK(s.circularity() == doctest::Approx(p / (2 * r)));
  CHECK(s.circularity() > 3.55);
}

TEST_CASE("disk perimeters stay close to 2 pi r") {
  for (const double r : {20.0, 40.0, 80.0}) {
    const int n = static_cast<int>(2 * r + 10);
    const RegionStats s = stats_of(disk_mask(n, n, n / 2.0, n / 2.0, r));
    CHECK(s.perimeter >= 2 * std::numbers::pi * r * 0.95);
    CHECK(s.perimeter <= 2 * std::numbers::pi * r * 1.10);
    CHECK(s.equiv_radius * s.equiv_radius * std::numbers::pi == doctest::Approx(static_cast<double>(s.area)));
  }
}

TEST_CASE("region_stats bbox, centroid and elongation") {
  BinaryMask m(20, 20);
  for (int y = 4; y <= 6; ++y) {
    for (int x = 2; x <= 17; ++x) m.set(x, y);
  }
  const RegionStats s = stats_of(m);
  CHECK(s.bbox == BBox{2, 4, 17, 6});
  CHECK(s.centroid.x == doctest::Approx(9.5));
  CHECK(s.centroid.y == doctest::Approx(5.0));
  CHECK(s.elongation > 3.0);
  CHECK(stats_of(disk_mask(60, 60, 30, 30, 20)).elongation == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("crop arithmetic, clamping and paste-back") {
  Raster img(100, 100);
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 7 + y * 13) % 256);
  }
  const auto full = crop(img, BBox{0, 0, 99, 99}, 0);
  CHECK(full.image == img);
  CHECK(full.offset_x == 0);

  const auto c = crop(img, BBox{10, 10, 20, 20}, 5);
  CHECK(c.image.width() == 21);
  CHECK(c.image.height() == 21);
  CHECK(c.offset_x == 5);
  CHECK(c.offset_y == 5);

  const auto edge = crop(img, BBox{90, 2, 99, 12}, 20);
  CHECK(edge.offset_x == 70);
  CHECK(edge.offset_y == 0);
  CHECK(edge.image.width() == 30);
  CHECK(edge.image.height() == 33);
  bool same = true;
  for (int y = 0; y < edge.image.height(); ++y) {
    for (int x = 0; x < edge.image.width(); ++x) {
      same = same && edge.image.at(x, y) == img.at(x + edge.offset_x, y + edge.offset_y);
    }
  }
  CHECK(same);

  CHECK_THROWS_AS(crop(img, BBox{200, 200, 210, 210}, 3), EmptyIntersection);
}

TEST_CASE("trace_boundaries loops run counterclockwise and contain holes") {
  BinaryMask donut = disk_mask(40, 40, 20, 20, 15);
  const BinaryMask hole = disk_mask(40, 40, 20, 20, 6);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      if (hole.get(x, y)) donut.set(x, y, false);
    }
  }
  const auto loops = trace_boundaries(donut);
  CHECK(loops.size() == 2);
  const Contour outer = outer_boundary(donut);
  CHECK(outer.signed_area() < 0.0);
  CHECK(std::abs(outer.signed_area()) == doctest::Approx(std::numbers::pi * 15 * 15).epsilon(0.02));
  CHECK(outer_boundary(BinaryMask(5, 5)).points.empty());
}
