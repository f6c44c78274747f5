#include "palynseg/exine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace palynseg {

void ExineConfig::validate() const {
  if (!(tau_r > 0.0 && tau_r <= 1.0)) throw std::invalid_argument("exine.tau_r must be in (0, 1]");
  if (erosion_se_radius < 1) throw std::invalid_argument("exine.erosion_se_radius must be >= 1");
  if (min_exine_px < 0.0) throw std::invalid_argument("exine.min_exine_px must be >= 0");
  if (!(max_exine_fraction > 0.0)) throw std::invalid_argument("exine.max_exine_fraction must be > 0");
  if (!std::isfinite(snake_balloon)) throw std::invalid_argument("exine.snake_balloon must be finite");
}

std::vector<double> normalized_backward_differences(const std::vector<double>& ratios) {
  if (ratios.size() < 2) return {};
  std::vector<double> d(ratios.size() - 1);
  double scale = 0.0;
  for (std::size_t j = 0; j + 1 < ratios.size(); ++j) {
    d[j] = ratios[j] - ratios[j + 1];
    scale = std::max(scale, std::abs(d[j]));
  }
  if (scale > 0.0) {
    for (double& v : d) v /= scale;
  } else {
    std::fill(d.begin(), d.end(), 0.0);
  }
  return d;
}

namespace {

// Erosion depth is measured from the pixel edges of the grain boundary rather
// than from the centres of its outermost pixels.
constexpr double kEdgeOffset = 0.5;

}  // namespace

EdgeRatioProfile edge_ratio_profile(const BinaryMask& edge_mask, const BinaryMask& grain_mask,
                                    const DiskSE& se) {
  if (edge_mask.width() != grain_mask.width() || edge_mask.height() != grain_mask.height()) {
    throw std::invalid_argument("edge_ratio_profile: mask sizes differ");
  }
  const auto seq = disk_erosion_sequence(grain_mask, se.radius(), kEdgeOffset);
  EdgeRatioProfile p;
  const auto edges = edge_mask.bits();
  for (const BinaryMask& m : seq) {
    const auto bits = m.bits();
    std::size_t total = 0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i]) continue;
      ++total;
      hit += edges[i];
    }
    if (total == 0) break;
    p.n_points_total.push_back(total);
    p.n_points_edge.push_back(hit);
    p.ratios.push_back(static_cast<double>(hit) / static_cast<double>(total));
  }
  p.derivative = normalized_backward_differences(p.ratios);
  return p;
}

GapDetection detect_gap(const EdgeRatioProfile& profile, const ExineConfig& cfg, double equiv_radius) {
  GapDetection g;
  for (std::size_t j = profile.derivative.size(); j-- > 0;) {
    if (profile.derivative[j] > cfg.tau_r) {
      g.erosion_index = j + 1;
      g.found = true;
      break;
    }
  }
  if (!g.found) return g;
  const double thickness = static_cast<double>(g.erosion_index) * cfg.erosion_se_radius;
  if (thickness <= cfg.min_exine_px) g.found = false;
  if (equiv_radius > 0.0 && thickness > cfg.max_exine_fraction * equiv_radius) g.found = false;
  return g;
}

BinaryMask coarse_exine_mask(const BinaryMask& grain_mask, const GapDetection& gap, const DiskSE& se) {
  if (!gap.found) throw NoExineBoundary();
  if (gap.erosion_index == 0) return grain_mask;
  return erode_euclidean(grain_mask, static_cast<double>(gap.erosion_index) * se.radius() + kEdgeOffset);
}

namespace {

ExineSegmentation no_boundary(const BinaryMask& grain_mask, EdgeRatioProfile profile, GapDetection gap) {
  ExineSegmentation r;
  r.exine_mask = BinaryMask(grain_mask.width(), grain_mask.height());
  r.inner_mask = grain_mask;
  r.profile = std::move(profile);
  r.gap = gap;
  r.gap.found = false;
  return r;
}

}  // namespace

ExineSegmentation segment_exine(const BinaryMask& grain_mask, const Raster& gray_subimage,
                                const PreprocConfig& preproc, const ExineConfig& exine,
                                const SnakeConfig& snake) {
  exine.validate();
  if (grain_mask.none()) throw EmptyInput();
  if (gray_subimage.channels() != 1 || gray_subimage.width() != grain_mask.width() ||
      gray_subimage.height() != grain_mask.height()) {
    throw std::invalid_argument("segment_exine: sub-image and mask must be 1-channel and aligned");
  }
  const DiskSE se(exine.erosion_se_radius);

  const RealImage diffused = anisotropic_diffuse(gray_subimage, preproc);
  const BinaryMask edges = sobel_edges(diffused, preproc).edges & grain_mask;
  EdgeRatioProfile profile = edge_ratio_profile(edges, grain_mask, se);
  const double equiv_radius = std::sqrt(static_cast<double>(grain_mask.count()) / std::numbers::pi);
  const GapDetection gap = detect_gap(profile, exine, equiv_radius);
  if (!gap.found) return no_boundary(grain_mask, std::move(profile), gap);

  const BinaryMask seed = coarse_exine_mask(grain_mask, gap, se);
  Contour init;
  try {
    init = discretize_perimeter(seed, snake.sample_stride);
  } catch (const Error&) {
    return no_boundary(grain_mask, std::move(profile), gap);
  }

  const RealImage energy = exine.snake_on_diffused ? gradient_energy(diffused) : gradient_energy(gray_subimage);
  VectorField field = gvf(energy, snake.gvf_mu, snake.gvf_iterations);
  if (exine.snake_normalize_gvf) field = normalize_field(field);
  SnakeConfig inner = snake;
  inner.kappa_balloon = exine.snake_balloon;
  inner.normalize_gvf = exine.snake_normalize_gvf;
  const EvolveResult evolved = evolve_traced(init, field, inner);

  ExineSegmentation r;
  r.inner_mask = contour_to_mask(evolved.contour, grain_mask.width(), grain_mask.height()) & grain_mask;
  if (r.inner_mask.none()) return no_boundary(grain_mask, std::move(profile), gap);
  r.exine_mask = grain_mask & ~r.inner_mask;
  r.inner_contour = evolved.contour;
  r.profile = std::move(profile);
  r.gap = gap;
  r.boundary_found = true;
  r.snake_last_displacement = evolved.last_displacement;
  return r;
}

ExineSegmentation segment_exine_or_throw(const BinaryMask& grain_mask, const Raster& gray_subimage,
                                         const PreprocConfig& preproc, const ExineConfig& exine,
                                         const SnakeConfig& snake) {
  ExineSegmentation r = segment_exine(grain_mask, gray_subimage, preproc, exine, snake);
  if (!r.boundary_found) throw NoExineBoundary();
  return r;
}

}  // namespace palynseg
