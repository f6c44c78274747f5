#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "palynseg/imgcore.hpp"
#include "palynseg/morpho.hpp"

namespace palynseg {

class DegenerateClustering : public Error {
 public:
  DegenerateClustering() : Error("image has a single intensity; 2-means clustering is degenerate") {}
};

enum class RejectionReason { None, MinArea, Circularity, IntensitySd, BorderTouch };

std::string_view to_string(RejectionReason r);

struct CoarseConfig {
  double circularity_max = 3.55;
  double sd_min = 20.0;
  int min_area = 900;
  int kmeans_max_iter = 100;
  double kmeans_tol = 0.1;
  bool reject_border_touching = false;
  /// Grains are darker than the bright-field background.
  bool foreground_dark = true;

  void validate() const;
};

struct MorphoConfig {
  int cleanup_se_radius = 4;
  bool open_first = true;

  void validate() const;
};

struct KMeansResult {
  std::array<double, 2> centers{};  // low, high
  /// Largest intensity assigned to the low cluster.
  int threshold = 0;
  int iterations = 0;
};

/// 1-D 2-means over a 256-bin histogram, seeded at the smallest and largest
/// occupied bins. Equidistant bins join the low cluster.
KMeansResult kmeans_threshold(const std::array<double, 256>& histogram, int max_iter, double tol);

std::array<double, 256> histogram(const Raster& gray);

BinaryMask kmeans_binarize(const Raster& gray, const CoarseConfig& cfg);

/// kmeans_binarize -> fill_holes -> open -> close (or close -> open).
BinaryMask coarse_masks(const Raster& gray, const CoarseConfig& cfg, const MorphoConfig& morpho);

struct GrainCandidate {
  Component component;
  RegionStats stats;
  /// Component-local mask over stats.bbox.
  BinaryMask mask;
  bool accepted = false;
  RejectionReason rejection_reason = RejectionReason::None;
};

/// 8-connected components with the area, circularity, intensity-SD and border
/// checks applied in that order. Output is sorted by centroid (y, x).
std::vector<GrainCandidate> filter_candidates(const BinaryMask& mask, const Raster& gray,
                                              const CoarseConfig& cfg);

}  // namespace palynseg
