#include "palynseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "palynseg/exine.hpp"
#include "palynseg/preproc.hpp"
#include "palynseg/snake.hpp"

namespace palynseg {

namespace {

struct GrainSnake {
  Contour contour;
  BinaryMask mask;
  double last_displacement = 0.0;
  bool failed = false;
};

GrainSnake run_grain_snake(const BinaryMask& coarse, const Raster& energy_source, const SnakeConfig& cfg) {
  GrainSnake out;
  try {
    const Contour init = discretize_perimeter(coarse, cfg.sample_stride);
    VectorField field = gvf(gradient_energy(energy_source), cfg.gvf_mu, cfg.gvf_iterations);
    if (cfg.normalize_gvf) field = normalize_field(field);
    const EvolveResult ev = evolve_traced(init, field, cfg);
    out.mask = contour_to_mask(ev.contour, coarse.width(), coarse.height());
    out.contour = ev.contour;
    out.last_displacement = ev.last_displacement;
    // A collapsed snake keeps the coarse mask instead.
    out.failed = out.mask.count() * 4 < coarse.count();
  } catch (const Error&) {
    out.failed = true;
  }
  if (out.failed) {
    out.mask = coarse;
    out.contour = discretize_perimeter(coarse, 1);
    out.last_displacement = 0.0;
  }
  return out;
}

void shift_stats(RegionStats& s, int dx, int dy, int width, int height) {
  s.bbox = {s.bbox.x0 + dx, s.bbox.y0 + dy, s.bbox.x1 + dx, s.bbox.y1 + dy};
  s.centroid = {s.centroid.x + dx, s.centroid.y + dy};
  s.touches_border = s.bbox.x0 == 0 || s.bbox.y0 == 0 || s.bbox.x1 == width - 1 || s.bbox.y1 == height - 1;
}

GrainRecord segment_grain(const GrainCandidate& cand, const Raster& gray, const Raster& pre,
                          const PipelineConfig& cfg) {
  const Cropped<std::uint8_t> sub = crop(gray, cand.stats.bbox, cfg.crop_margin);
  const int ox = sub.offset_x;
  const int oy = sub.offset_y;
  const int w = sub.image.width();
  const int h = sub.image.height();

  BinaryMask coarse(w, h);
  const int dx = cand.stats.bbox.x0 - ox;
  const int dy = cand.stats.bbox.y0 - oy;
  for (int y = 0; y < cand.mask.height(); ++y) {
    for (int x = 0; x < cand.mask.width(); ++x) {
      if (cand.mask.get(x, y)) coarse.set(x + dx, y + dy);
    }
  }

  const Raster energy_source =
      cfg.gradient_source == GradientSource::Preprocessed ? crop(pre, cand.stats.bbox, cfg.crop_margin).image : sub.image;
  GrainSnake snake = run_grain_snake(coarse, energy_source, cfg.snake);

  GrainRecord rec;
  rec.offset_x = ox;
  rec.offset_y = oy;
  rec.diagnostics.snake_failed = snake.failed;
  rec.diagnostics.snake_max_displacement = snake.last_displacement;
  rec.diagnostics.cluster_suspect = cand.stats.elongation > cfg.cluster_elongation;
  rec.grain_contour = snake.contour.translated(ox, oy);

  const std::vector<Pixel> pixels = mask_pixels(snake.mask);
  rec.stats = region_stats(pixels, sub.image);
  shift_stats(rec.stats, ox, oy, gray.width(), gray.height());
  rec.bbox = rec.stats.bbox;
  rec.diagnostics.border_touch = rec.stats.touches_border;

  ExineSegmentation ex;
  try {
    ex = segment_exine(snake.mask, sub.image, cfg.preproc, cfg.exine, cfg.snake);
  } catch (const Error&) {
    ex = ExineSegmentation{};
  }
  rec.edge_ratios = ex.profile.ratios;
  if (ex.boundary_found) {
    rec.exine_mask = std::move(ex.exine_mask);
    rec.inner_mask = std::move(ex.inner_mask);
    rec.inner_contour = ex.inner_contour.translated(ox, oy);
    rec.gap_erosion_index = ex.gap.erosion_index;
    rec.exine_thickness_est = static_cast<double>(ex.gap.erosion_index * cfg.exine.erosion_se_radius);
    rec.diagnostics.inner_snake_max_displacement = ex.snake_last_displacement;
  } else {
    rec.exine_mask = BinaryMask(w, h);
    rec.inner_mask = snake.mask;
    rec.diagnostics.no_exine_boundary = true;
  }
  rec.grain_mask = std::move(snake.mask);
  return rec;
}

}  // namespace

Raster preprocess(const Raster& gray, const PreprocConfig& cfg) { return median_filter(clahe(gray, cfg), cfg.median_radius); }

SegmentationResult segment_image(const Raster& img, const PipelineConfig& cfg) {
  cfg.validate();
  SegmentationResult result;
  result.width = img.width();
  result.height = img.height();
  const Raster gray = img.channels() == 1 ? img : to_grayscale(img);
  const Raster pre = preprocess(gray, cfg.preproc);

  BinaryMask coarse;
  try {
    coarse = coarse_masks(pre, cfg.coarse, cfg.morpho);
  } catch (const DegenerateClustering& e) {
    result.warnings.push_back(std::string("degenerate_clustering: ") + e.what());
    return result;
  }

  for (const GrainCandidate& cand : filter_candidates(coarse, gray, cfg.coarse)) {
    if (!cand.accepted) {
      result.rejected.push_back(
          {cand.stats.bbox, cand.stats.area, cand.stats.circularity(), cand.stats.intensity_sd, cand.rejection_reason});
      continue;
    }
    result.grains.push_back(segment_grain(cand, gray, pre, cfg));
  }

  std::vector<std::size_t> order(result.grains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const Point2 a = result.grains[i].stats.centroid, b = result.grains[j].stats.centroid;
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  std::vector<GrainRecord> sorted;
  sorted.reserve(order.size());
  for (const std::size_t i : order) sorted.push_back(std::move(result.grains[i]));
  result.grains = std::move(sorted);
  for (std::size_t i = 0; i < result.grains.size(); ++i) result.grains[i].id = static_cast<int>(i + 1);
  return result;
}

std::vector<Pixel> rasterize_segment(Point2 a, Point2 b) {
  int x0 = static_cast<int>(std::lround(a.x));
  int y0 = static_cast<int>(std::lround(a.y));
  const int x1 = static_cast<int>(std::lround(b.x));
  const int y1 = static_cast<int>(std::lround(b.y));
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  std::vector<Pixel> out;
  for (;;) {
    out.push_back({x0, y0});
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return out;
}

Raster render_overlay(const Raster& img, const std::vector<GrainRecord>& records) {
  Raster out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y, img.channels() == 3 ? c : 0);
    }
  }
  auto draw = [&](const Contour& contour, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t n = contour.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!contour.closed && i + 1 == n) break;
      for (const Pixel& p : rasterize_segment(contour.points[i], contour.points[(i + 1) % n])) {
        if (!out.contains(p.x, p.y)) continue;
        out.at(p.x, p.y, 0) = r;
        out.at(p.x, p.y, 1) = g;
        out.at(p.x, p.y, 2) = b;
      }
    }
  };
  for (const GrainRecord& rec : records) draw(rec.grain_contour, 0, 0, 255);
  for (const GrainRecord& rec : records) {
    if (rec.inner_contour) draw(*rec.inner_contour, 0, 255, 0);
  }
  return out;
}

}  // namespace palynseg
