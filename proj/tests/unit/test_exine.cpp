#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "palynseg/exine.hpp"
#include "palynseg/phantom.hpp"

using namespace palynseg;
using testutil::disk_mask;
using testutil::fill_mask;
using testutil::rms_radius_error;

namespace {

// Grain r=60 at (70, 70) in 140x140 with edges on the outer 15 px band; the
// golden file holds the same profile computed with scipy's exact EDT.
struct Annulus {
  BinaryMask grain{140, 140};
  BinaryMask edges{140, 140};
};

Annulus annulus() {
  Annulus a;
  for (int y = 0; y < 140; ++y) {
    for (int x = 0; x < 140; ++x) {
      const double d = std::hypot(x - 70.0, y - 70.0);
      if (d <= 60.0) a.grain.set(x, y);
      if (d <= 60.0 && d > 45.0) a.edges.set(x, y);
    }
  }
  return a;
}

std::vector<double> read_golden(const std::string& name) {
  std::ifstream in(std::string(PALYNSEG_GOLDEN_DIR) + "/" + name);
  REQUIRE(in.good());
  std::vector<double> v;
  for (double x; in >> x;) v.push_back(x);
  return v;
}

EdgeRatioProfile profile_of(std::vector<double> ratios) {
  EdgeRatioProfile p;
  p.derivative = normalized_backward_differences(ratios);
  p.ratios = std::move(ratios);
  return p;
}

ExineConfig unguarded() {
  ExineConfig c;
  c.min_exine_px = 0.0;
  return c;
}

Phantom single_grain(double inner, double exine, InteriorStyle style, std::uint64_t seed) {
  PhantomSpec spec;
  spec.width = spec.height = static_cast<int>(2 * (inner + exine) + 60);
  spec.rng_seed = seed;
  PhantomGrain g;
  g.center = {spec.width / 2.0 + 0.3, spec.height / 2.0 - 0.2};
  g.inner_radius = inner;
  g.exine_thickness = exine;
  g.interior_style = style;
  spec.grains.push_back(g);
  return generate(spec);
}

}  // namespace

TEST_CASE("config validation") {
  ExineConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau_r = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.tau_r = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.erosion_se_radius = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("edge_ratio_profile trivial cases") {
  const BinaryMask grain = disk_mask(50, 50, 25, 25, 18);
  const DiskSE se(2);
  const EdgeRatioProfile none = edge_ratio_profile(BinaryMask(50, 50), grain, se);
  REQUIRE(none.ratios.size() > 2);
  CHECK(none.derivative.size() == none.ratios.size() - 1);
  for (const double r : none.ratios) CHECK(r == 0.0);
  for (const double d : none.derivative) CHECK(d == 0.0);

  const EdgeRatioProfile all = edge_ratio_profile(grain, grain, se);
  for (const double r : all.ratios) CHECK(r == 1.0);
  for (const double d : all.derivative) CHECK(d == 0.0);
  CHECK(all.n_points_total.front() == grain.count());

  CHECK_THROWS_AS(edge_ratio_profile(BinaryMask(50, 50), BinaryMask(50, 50), se), EmptyInput);
}

TEST_CASE("annulus profile matches the golden file") {
  const Annulus a = annulus();
  const EdgeRatioProfile p = edge_ratio_profile(a.edges, a.grain, DiskSE(2));
  const std::vector<double> golden = read_golden("annulus_profile.txt");
  REQUIRE(p.ratios.size() == golden.size());
  for (std::size_t k = 0; k < golden.size(); ++k) CHECK(p.ratios[k] == doctest::Approx(golden[k]).epsilon(1e-12));

  // Starts at the band fraction, falls steeply before index 9, then stays flat.
  CHECK(p.ratios[0] == doctest::Approx(1.0 - 45.0 * 45.0 / 3600.0).epsilon(0.02));
  const auto peak = std::max_element(p.derivative.begin(), p.derivative.end()) - p.derivative.begin();
  CHECK(peak >= 6);
  CHECK(peak <= 8);
  CHECK(p.derivative[peak] == 1.0);
  for (std::size_t j = 0; j < p.derivative.size(); ++j) {
    if (static_cast<long>(j) != peak) CHECK(p.derivative[j] < 1.0);
    if (j > 8) CHECK(p.derivative[j] == 0.0);
  }

  const GapDetection g = detect_gap(p, ExineConfig{}, 60.0);
  REQUIRE(g.found);
  CHECK(std::abs(static_cast<double>(g.erosion_index) * 2.0 - 15.0) <= 3.0);
}

TEST_CASE("normalized_backward_differences") {
  const auto d = normalized_backward_differences({1.0, 0.8, 0.2, 0.3});
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(1.0 / 3.0));
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == doctest::Approx(-1.0 / 6.0));
  CHECK(normalized_backward_differences({0.5}).empty());
  for (const double v : normalized_backward_differences({0.3, 0.3, 0.3})) CHECK(v == 0.0);
}

TEST_CASE("detect_gap examples") {
  EdgeRatioProfile p;
  p.derivative = {0.05, 0.3, 1.0, 0.02};
  const GapDetection g = detect_gap(p, unguarded(), 0.0);
  CHECK(g.found);
  CHECK(g.erosion_index == 3);

  p.derivative = {0.0, 0.0, 0.0};
  CHECK_FALSE(detect_gap(p, unguarded(), 0.0).found);

  // One erosion step of radius 2 implies a 2 px exine, at the lower guard.
  p.derivative = {1.0, 0.0, 0.0};
  CHECK_FALSE(detect_gap(p, ExineConfig{}, 0.0).found);
  CHECK(detect_gap(p, unguarded(), 0.0).found);

  // Index 3 at radius 2 is 6 px, more than half of an equivalent radius of 10.
  p.derivative = {0.05, 0.3, 1.0, 0.02};
  CHECK_FALSE(detect_gap(p, unguarded(), 10.0).found);
  CHECK(detect_gap(p, unguarded(), 12.0).found);
}

TEST_CASE("detect_gap is invariant under scaling the ratio differences") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0), scale(0.01, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(5 + trial % 20);
    for (double& v : r) v = u(rng);
    std::vector<double> s = r;
    const double c = scale(rng), offset = u(rng);
    for (double& v : s) v = c * v + offset;
    const GapDetection a = detect_gap(profile_of(r), unguarded(), 0.0);
    const GapDetection b = detect_gap(profile_of(s), unguarded(), 0.0);
    CHECK(a.found == b.found);
    CHECK(a.erosion_index == b.erosion_index);
  }
}

TEST_CASE("erosion_index does not grow with tau_r") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(3 + trial % 30);
    for (double& v : r) v = u(rng);
    const EdgeRatioProfile p = profile_of(r);
    ExineConfig lo = unguarded(), hi = unguarded();
    lo.tau_r = 0.05 + 0.9 * u(rng);
    hi.tau_r = lo.tau_r + (1.0 - lo.tau_r) * u(rng);
    const GapDetection a = detect_gap(p, lo, 0.0);
    const GapDetection b = detect_gap(p, hi, 0.0);
    if (b.found) {
      CHECK(a.found);
      CHECK(b.erosion_index <= a.erosion_index);
    }
  }
}

TEST_CASE("ratios are invariant under translating both masks") {
  const Annulus a = annulus();
  BinaryMask g2(180, 170), e2(180, 170);
  for (int y = 0; y < 140; ++y) {
    for (int x = 0; x < 140; ++x) {
      g2.set(x + 23, y + 17, a.grain.get(x, y));
      e2.set(x + 23, y + 17, a.edges.get(x, y));
    }
  }
  const DiskSE se(2);
  CHECK(edge_ratio_profile(e2, g2, se).ratios == edge_ratio_profile(a.edges, a.grain, se).ratios);
}

TEST_CASE("coarse_exine_mask") {
  const BinaryMask disk = disk_mask(140, 140, 70, 70, 60);
  const DiskSE se(2);
  CHECK(coarse_exine_mask(disk, GapDetection{0, true}, se) == disk);
  const BinaryMask m = coarse_exine_mask(disk, GapDetection{7, true}, se);
  CHECK(static_cast<double>(m.count()) == doctest::Approx(std::numbers::pi * 46 * 46).epsilon(0.05));
  CHECK(m.subset_of(disk));
  CHECK_THROWS_AS(coarse_exine_mask(disk, GapDetection{3, false}, se), NoExineBoundary);
}

TEST_CASE("segment_exine on the annulus phantom") {
  const Phantom ph = single_grain(45, 15, InteriorStyle::Smooth, 5);
  const GrainTruth& t = ph.truth.grains[0];
  const ExineSegmentation s =
      segment_exine(t.grain_mask, ph.image, PreprocConfig{}, ExineConfig{}, SnakeConfig{});
  REQUIRE(s.boundary_found);
  CHECK(rms_radius_error(s.inner_contour, t.center.x, t.center.y, 45.0) <= 3.0);
  CHECK(std::abs(static_cast<double>(s.gap.erosion_index) * 2.0 - 15.0) <= 3.0);
  CHECK((s.exine_mask & s.inner_mask).none());
  CHECK((s.exine_mask | s.inner_mask) == t.grain_mask);
  CHECK(mask_iou(s.inner_mask, t.inner_mask) > 0.85);
}

TEST_CASE("segment_exine partitions the grain across styles and sizes") {
  const InteriorStyle styles[] = {InteriorStyle::Smooth, InteriorStyle::Speckled, InteriorStyle::Patterned};
  for (int i = 0; i < 3; ++i) {
    const double inner = 40.0 + 20.0 * i, exine = 8.0 + 8.0 * i;
    const Phantom ph = single_grain(inner, exine, styles[i], 10 + i);
    const GrainTruth& t = ph.truth.grains[0];
    const ExineSegmentation s =
        segment_exine(t.grain_mask, ph.image, PreprocConfig{}, ExineConfig{}, SnakeConfig{});
    CHECK(s.boundary_found);
    CHECK((s.exine_mask & s.inner_mask).none());
    CHECK((s.exine_mask | s.inner_mask) == t.grain_mask);
    CHECK(std::abs(static_cast<double>(s.gap.erosion_index) * 2.0 - exine) <= 3.0);
  }
}

TEST_CASE("edge-free disk has no exine boundary") {
  const BinaryMask disk = disk_mask(160, 160, 80, 80, 55);
  const Raster img = fill_mask(disk, 90, 200);
  const ExineSegmentation s = segment_exine(disk, img, PreprocConfig{}, ExineConfig{}, SnakeConfig{});
  CHECK_FALSE(s.boundary_found);
  CHECK_FALSE(s.gap.found);
  CHECK(s.inner_mask == disk);
  CHECK(s.exine_mask.none());
  CHECK(s.inner_contour.points.empty());
  CHECK_THROWS_AS(segment_exine_or_throw(disk, img, PreprocConfig{}, ExineConfig{}, SnakeConfig{}),
                  NoExineBoundary);
}
