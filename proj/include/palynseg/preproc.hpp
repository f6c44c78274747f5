#pragma once

#include "palynseg/imgcore.hpp"

namespace palynseg {

enum class ThresholdMode { Otsu, Fixed };

struct PreprocConfig {
  int clahe_tile = 64;
  /// Clip limit in multiples of the uniform bin height (tile_area / 256).
  double clahe_clip = 2.0;
  int median_radius = 2;
  int pm_iterations = 15;
  double pm_kappa = 30.0;
  double pm_lambda = 0.2;
  ThresholdMode sobel_threshold_mode = ThresholdMode::Otsu;
  double sobel_fixed_threshold = 100.0;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;
};

Raster clahe(const Raster& img, const PreprocConfig& cfg);

/// (2r+1)^2 window median with edge replication.
Raster median_filter(const Raster& img, int radius);

/// Perona-Malik diffusion with exponential conductance, 4-neighbour scheme and
/// replicated borders.
RealImage anisotropic_diffuse(const RealImage& img, const PreprocConfig& cfg);
RealImage anisotropic_diffuse(const Raster& img, const PreprocConfig& cfg);

struct SobelResult {
  RealImage magnitude;
  BinaryMask edges;
  double threshold = 0.0;
};

RealImage sobel_magnitude(const RealImage& img);

SobelResult sobel_edges(const RealImage& img, const PreprocConfig& cfg);

/// Otsu threshold over a 256-bin histogram of `values` spanning [0, max].
/// Returns the histogram bin index b such that values in bins > b are
/// foreground, together with the bin width. All-zero input yields bin 255.
struct OtsuSplit {
  int bin = 255;
  double bin_width = 0.0;
  bool above(double v) const;
};
OtsuSplit otsu_split(std::span<const double> values);

/// Sobel magnitude normalised to [0, 1] by its maximum; constant input gives
/// an all-zero image.
RealImage gradient_energy(const RealImage& img);
RealImage gradient_energy(const Raster& img);

RealImage to_real(const Raster& img);

}  // namespace palynseg
