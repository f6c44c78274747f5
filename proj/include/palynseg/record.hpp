#pragma once

#include <optional>
#include <vector>

#include "palynseg/imgcore.hpp"

namespace palynseg {

struct GrainDiagnostics {
  bool border_touch = false;
  bool no_exine_boundary = false;
  /// Elongated coarse component, typically two grains in contact.
  bool cluster_suspect = false;
  /// The grain snake could not run; the coarse mask stands in for the fine one.
  bool snake_failed = false;
  double snake_max_displacement = 0.0;
  double inner_snake_max_displacement = 0.0;
};

/// One segmented grain. Masks live in sub-image coordinates, contours and
/// bbox in full-image coordinates.
struct GrainRecord {
  int id = 0;
  BBox bbox;
  int offset_x = 0;
  int offset_y = 0;
  Contour grain_contour;
  std::optional<Contour> inner_contour;
  BinaryMask grain_mask;
  BinaryMask exine_mask;
  BinaryMask inner_mask;
  RegionStats stats;
  std::optional<double> exine_thickness_est;
  std::optional<std::size_t> gap_erosion_index;
  std::vector<double> edge_ratios;
  GrainDiagnostics diagnostics;

  int sub_width() const { return grain_mask.width(); }
  int sub_height() const { return grain_mask.height(); }
};

/// Places a sub-image mask into a full-size frame at (offset_x, offset_y).
BinaryMask place_mask(const BinaryMask& sub, int offset_x, int offset_y, int width, int height);

}  // namespace palynseg
