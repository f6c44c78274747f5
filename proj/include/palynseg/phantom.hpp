#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palynseg/imgcore.hpp"
#include "palynseg/record.hpp"

namespace palynseg {

class SpecOverlap : public Error {
 public:
  SpecOverlap() : Error("phantom grains overlap and the spec does not allow overlap") {}
};

enum class InteriorStyle { Smooth, Speckled, Patterned };

std::string_view to_string(InteriorStyle s);
InteriorStyle interior_style_from_string(std::string_view s);

struct PhantomGrain {
  Point2 center;
  double inner_radius = 45.0;
  double exine_thickness = 15.0;
  InteriorStyle interior_style = InteriorStyle::Smooth;
  double interior_mean = 150.0;
  double interior_sd = 8.0;
  double exine_mean = 70.0;
  double exine_sd = 45.0;
  /// Fraction of exine texture cells carrying a bright dot.
  double edge_density = 0.5;
  /// Texture cell size (px) of the exine.
  int texture_cell = 2;
  /// Wavelength (px) of the patterned interior.
  double pattern_period = 24.0;

  double outer_radius() const { return inner_radius + exine_thickness; }
};

struct PhantomDebris {
  Point2 center;
  double radius = 5.0;
  double intensity = 60.0;
};

/// Uniform elongated blob (rotated rectangle).
struct PhantomSmudge {
  Point2 center;
  double length = 150.0;
  double width = 12.0;
  double angle_deg = 0.0;
  double intensity = 60.0;
};

struct PhantomSpec {
  std::string name = "phantom";
  int width = 512;
  int height = 512;
  double background_mean = 200.0;
  double background_sd = 5.0;
  std::vector<PhantomGrain> grains;
  std::vector<PhantomDebris> debris;
  std::vector<PhantomSmudge> smudges;
  std::uint64_t rng_seed = 1;
  /// Permit overlapping grains (cluster scenes).
  bool allow_overlap = false;

  void validate() const;
};

struct GrainTruth {
  Point2 center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  BinaryMask grain_mask;
  BinaryMask inner_mask;
  BinaryMask exine_mask;
};

struct PhantomTruth {
  int width = 0;
  int height = 0;
  std::vector<GrainTruth> grains;
};

struct Phantom {
  Raster image;
  PhantomTruth truth;
};

/// Deterministic rendering of a phantom scene and its ground truth.
Phantom generate(const PhantomSpec& spec);

struct RandomPhantomOptions {
  int width = 1024;
  int height = 1024;
  int max_grains = 3;
  double min_inner_radius = 40.0;
  double max_inner_radius = 120.0;
  double min_exine = 8.0;
  double max_exine = 25.0;
  double max_noise_sd = 10.0;
  /// Gap kept between grains and from the frame.
  double spacing = 40.0;
};

/// Seeded random scene with non-overlapping grains; interior styles cycle
/// with the seed.
PhantomSpec random_phantom_spec(std::uint64_t seed, const RandomPhantomOptions& opts = {});

struct GrainScore {
  std::size_t truth_index = 0;
  /// Index into the scored records, or -1 when unmatched.
  int record_index = -1;
  double grain_iou = 0.0;
  double grain_rms_radial = 0.0;
  /// NaN when the record has no inner contour.
  double inner_rms_radial = 0.0;
  double exine_thickness_error = 0.0;
  double exine_iou = 0.0;
};

struct ScoreReport {
  std::vector<GrainScore> grains;
  std::size_t matched = 0;
  std::size_t false_positives = 0;
  double recall = 0.0;
};

double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// RMS of (|p - center| - radius) over the contour points.
double rms_radial_error(const Contour& contour, Point2 center, double radius);

/// A truth grain matches the record whose full-frame grain mask has the
/// highest IoU with it, provided that IoU reaches `iou_threshold`.
ScoreReport score(std::span<const GrainRecord> records, const PhantomTruth& truth,
                  double iou_threshold = 0.7);

}  // namespace palynseg
