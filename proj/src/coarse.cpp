#include "palynseg/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace palynseg {

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::None: return "none";
    case RejectionReason::MinArea: return "min_area";
    case RejectionReason::Circularity: return "circularity";
    case RejectionReason::IntensitySd: return "intensity_sd";
    case RejectionReason::BorderTouch: return "border_touch";
  }
  return "unknown";
}

void CoarseConfig::validate() const {
  if (!(circularity_max >= std::numbers::pi)) {
    throw std::invalid_argument("coarse.circularity_max must be >= pi");
  }
  if (sd_min < 0.0) throw std::invalid_argument("coarse.sd_min must be >= 0");
  if (min_area < 1) throw std::invalid_argument("coarse.min_area must be >= 1");
  if (kmeans_max_iter < 1) throw std::invalid_argument("coarse.kmeans_max_iter must be >= 1");
  if (!(kmeans_tol > 0.0)) throw std::invalid_argument("coarse.kmeans_tol must be > 0");
}

void MorphoConfig::validate() const {
  if (cleanup_se_radius < 1) throw std::invalid_argument("morpho.cleanup_se_radius must be >= 1");
}

std::array<double, 256> histogram(const Raster& gray) {
  std::array<double, 256> h{};
  for (std::uint8_t v : gray.pixels()) h[v] += 1.0;
  return h;
}

KMeansResult kmeans_threshold(const std::array<double, 256>& hist, int max_iter, double tol) {
  int lo = 0;
  int hi = 255;
  while (lo < 256 && hist[lo] == 0.0) ++lo;
  while (hi >= 0 && hist[hi] == 0.0) --hi;
  if (lo >= hi) throw DegenerateClustering();

  KMeansResult r;
  r.centers = {static_cast<double>(lo), static_cast<double>(hi)};
  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it + 1;
    const double split = (r.centers[0] + r.centers[1]) / 2.0;
    double n0 = 0.0, s0 = 0.0, n1 = 0.0, s1 = 0.0;
    for (int v = 0; v < 256; ++v) {
      if (v <= split) {
        n0 += hist[v];
        s0 += v * hist[v];
      } else {
        n1 += hist[v];
        s1 += v * hist[v];
      }
    }
    const std::array<double, 2> next = {n0 > 0.0 ? s0 / n0 : r.centers[0], n1 > 0.0 ? s1 / n1 : r.centers[1]};
    const double moved = std::max(std::abs(next[0] - r.centers[0]), std::abs(next[1] - r.centers[1]));
    r.centers = next;
    if (moved < tol) break;
  }
  r.threshold = static_cast<int>(std::floor((r.centers[0] + r.centers[1]) / 2.0));
  return r;
}

BinaryMask kmeans_binarize(const Raster& gray, const CoarseConfig& cfg) {
  if (gray.channels() != 1) throw std::invalid_argument("kmeans_binarize: expected 1 channel");
  auto hist = histogram(gray);
  if (!cfg.foreground_dark) std::reverse(hist.begin(), hist.end());
  const KMeansResult km = kmeans_threshold(hist, cfg.kmeans_max_iter, cfg.kmeans_tol);

  BinaryMask out(gray.width(), gray.height());
  const auto src = gray.pixels();
  auto dst = out.bits();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int v = cfg.foreground_dark ? src[i] : 255 - src[i];
    dst[i] = v <= km.threshold ? 1 : 0;
  }
  return out;
}

BinaryMask coarse_masks(const Raster& gray, const CoarseConfig& cfg, const MorphoConfig& morpho) {
  const DiskSE se(morpho.cleanup_se_radius);
  BinaryMask m = fill_holes(kmeans_binarize(gray, cfg));
  if (morpho.open_first) {
    m = close(open(m, se), se);
  } else {
    m = open(close(m, se), se);
  }
  return m;
}

std::vector<GrainCandidate> filter_candidates(const BinaryMask& mask, const Raster& gray,
                                              const CoarseConfig& cfg) {
  if (gray.width() != mask.width() || gray.height() != mask.height()) {
    throw std::invalid_argument("filter_candidates: mask and image sizes differ");
  }
  Labeling lab = connected_components(mask, Connectivity::Eight);
  std::vector<GrainCandidate> out;
  out.reserve(lab.components.size());
  for (auto& comp : lab.components) {
    GrainCandidate c;
    c.stats = region_stats(comp.pixels, gray);
    c.mask = BinaryMask(c.stats.bbox.width(), c.stats.bbox.height());
    for (const Pixel& p : comp.pixels) c.mask.set(p.x - c.stats.bbox.x0, p.y - c.stats.bbox.y0);
    c.component = std::move(comp);

    if (c.stats.area < static_cast<std::size_t>(cfg.min_area)) {
      c.rejection_reason = RejectionReason::MinArea;
    } else if (c.stats.circularity() >= cfg.circularity_max) {
      c.rejection_reason = RejectionReason::Circularity;
    } else if (c.stats.intensity_sd <= cfg.sd_min) {
      c.rejection_reason = RejectionReason::IntensitySd;
    } else if (cfg.reject_border_touching && c.stats.touches_border) {
      c.rejection_reason = RejectionReason::BorderTouch;
    }
    c.accepted = c.rejection_reason == RejectionReason::None;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const GrainCandidate& a, const GrainCandidate& b) {
    if (a.stats.centroid.y != b.stats.centroid.y) return a.stats.centroid.y < b.stats.centroid.y;
    return a.stats.centroid.x < b.stats.centroid.x;
  });
  return out;
}

}  // namespace palynseg
