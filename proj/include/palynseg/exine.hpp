#pragma once

#include <vector>

#include "palynseg/imgcore.hpp"
#include "palynseg/morpho.hpp"
#include "palynseg/preproc.hpp"
#include "palynseg/snake.hpp"

namespace palynseg {

class NoExineBoundary : public Error {
 public:
  NoExineBoundary() : Error("no exine/inner boundary found in the edge-ratio profile") {}
};

struct ExineConfig {
  double tau_r = 0.1;
  int erosion_se_radius = 2;
  /// Gaps implying an exine no thicker than this are discarded.
  double min_exine_px = 2.0;
  /// Gaps implying an exine thicker than this fraction of the grain's
  /// equivalent radius are discarded.
  double max_exine_fraction = 0.5;
  /// Drive the inner snake with the gradient of the diffused sub-image
  /// (true) or of the raw sub-image (false).
  bool snake_on_diffused = true;
  /// Balloon weight of the inner snake; negative pushes inward.
  double snake_balloon = -0.05;
  /// Normalise the inner snake's GVF field to unit length.
  bool snake_normalize_gvf = false;

  void validate() const;
};

struct EdgeRatioProfile {
  /// ratios[k] = |edges & m_k| / |m_k| for the non-empty masks
  /// m_k = erode_euclidean(grain, k * se_radius + 0.5), m_0 = grain.
  std::vector<double> ratios;
  /// derivative[j] = (ratios[j] - ratios[j+1]) / max_i |ratios[i] - ratios[i+1]|.
  std::vector<double> derivative;
  std::vector<std::size_t> n_points_total;
  std::vector<std::size_t> n_points_edge;
};

struct GapDetection {
  /// Index into the erosion sequence of the mask just after the gap.
  std::size_t erosion_index = 0;
  bool found = false;
};

EdgeRatioProfile edge_ratio_profile(const BinaryMask& edge_mask, const BinaryMask& grain_mask,
                                    const DiskSE& se);

/// Normalised backward differences of a ratio vector.
std::vector<double> normalized_backward_differences(const std::vector<double>& ratios);

/// Scans the derivative from its end and stops at the first value above tau_r.
/// `equiv_radius` feeds the thickness guards; pass 0 to disable the upper one.
GapDetection detect_gap(const EdgeRatioProfile& profile, const ExineConfig& cfg, double equiv_radius);

/// The erosion mask at the gap, i.e. the coarse inner-part estimate.
BinaryMask coarse_exine_mask(const BinaryMask& grain_mask, const GapDetection& gap, const DiskSE& se);

struct ExineSegmentation {
  BinaryMask exine_mask;
  BinaryMask inner_mask;
  Contour inner_contour;
  EdgeRatioProfile profile;
  GapDetection gap;
  bool boundary_found = false;
  double snake_last_displacement = 0.0;
};

/// Full exine pipeline on one grain sub-image. When no boundary is found the
/// result has an empty exine mask, inner_mask == grain_mask and
/// boundary_found == false; segment_exine_or_throw raises NoExineBoundary
/// instead.
ExineSegmentation segment_exine(const BinaryMask& grain_mask, const Raster& gray_subimage,
                                const PreprocConfig& preproc, const ExineConfig& exine,
                                const SnakeConfig& snake);
ExineSegmentation segment_exine_or_throw(const BinaryMask& grain_mask, const Raster& gray_subimage,
                                         const PreprocConfig& preproc, const ExineConfig& exine,
                                         const SnakeConfig& snake);

}  // namespace palynseg
