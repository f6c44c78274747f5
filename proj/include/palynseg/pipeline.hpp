#pragma once

#include <string>
#include <vector>

#include "palynseg/coarse.hpp"
#include "palynseg/config.hpp"
#include "palynseg/record.hpp"

namespace palynseg {

struct RejectedCandidate {
  BBox bbox;
  std::size_t area = 0;
  double circularity = 0.0;
  double intensity_sd = 0.0;
  RejectionReason reason = RejectionReason::None;
};

struct SegmentationResult {
  int width = 0;
  int height = 0;
  std::vector<GrainRecord> grains;
  std::vector<RejectedCandidate> rejected;
  std::vector<std::string> warnings;
};

/// CLAHE and median filtering of the grayscale image.
Raster preprocess(const Raster& gray, const PreprocConfig& cfg);

/// Coarse-to-fine segmentation of every grain in an image. Records are
/// ordered by centroid (y, x) and numbered from 1.
SegmentationResult segment_image(const Raster& img, const PipelineConfig& cfg);

/// RGB copy of the image with grain contours in blue and inner contours in
/// green, drawn as closed 1-px polylines.
Raster render_overlay(const Raster& img, const std::vector<GrainRecord>& records);

/// Bresenham segment between rounded endpoints, both included.
std::vector<Pixel> rasterize_segment(Point2 a, Point2 b);

}  // namespace palynseg
