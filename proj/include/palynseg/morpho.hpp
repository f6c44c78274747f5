#pragma once

#include <vector>

#include "palynseg/imgcore.hpp"

namespace palynseg {

/// Disk structuring element: offsets with dx^2 + dy^2 <= r^2.
class DiskSE {
 public:
  explicit DiskSE(int radius);

  int radius() const { return radius_; }
  /// Half-width of the disk row at vertical offset dy, |dy| <= radius.
  int half_width(int dy) const { return half_widths_[dy + radius_]; }
  std::vector<Pixel> offsets() const;

 private:
  int radius_;
  std::vector<int> half_widths_;
};

/// Pixels outside the mask count as background for both operations.
BinaryMask erode(const BinaryMask& mask, const DiskSE& se);
BinaryMask dilate(const BinaryMask& mask, const DiskSE& se);
BinaryMask open(const BinaryMask& mask, const DiskSE& se);
BinaryMask close(const BinaryMask& mask, const DiskSE& se);

/// Fills background regions not 4-connected to the image border.
BinaryMask fill_holes(const BinaryMask& mask);

/// mask, erode(mask), erode(erode(mask)), ... ending with the first empty mask.
std::vector<BinaryMask> erosion_sequence(const BinaryMask& mask, const DiskSE& se);

/// Squared Euclidean distance from each pixel to the nearest background pixel,
/// pixels outside the mask counting as background. Background pixels get 0.
Image<double> squared_distance_to_background(const BinaryMask& mask);

/// Erosion by the Euclidean disk dx^2 + dy^2 <= radius^2 for a real radius.
BinaryMask erode_euclidean(const BinaryMask& mask, double radius);

/// m_0 = mask and m_k = erode_euclidean(mask, k * step + offset) for k >= 1,
/// ending with the first empty mask.
std::vector<BinaryMask> disk_erosion_sequence(const BinaryMask& mask, double step, double offset = 0.0);

}  // namespace palynseg
