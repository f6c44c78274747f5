#pragma once

#include <vector>

#include "palynseg/imgcore.hpp"

namespace palynseg {

class TooFewPoints : public Error {
 public:
  TooFewPoints() : Error("contour has fewer than 3 points") {}
};

class SingularSystem : public Error {
 public:
  SingularSystem() : Error("snake internal-energy system is singular; check alpha, beta and gamma") {}
};

struct SnakeConfig {
  int iterations = 100;
  int sample_stride = 20;
  double alpha = 0.1;  // tension
  double beta = 0.5;   // rigidity (thin plate)
  double gamma = 1.0;  // time step
  double kappa_gvf = 1.0;
  /// Positive pushes outward.
  double kappa_balloon = 0.05;
  double gvf_mu = 0.01;
  int gvf_iterations = 200;
  /// Rescale GVF vectors to unit length before sampling.
  bool normalize_gvf = false;
  int resample_every = 10;
  /// Target point spacing (px) of the arc-length resampling.
  double resample_spacing = 1.5;

  void validate() const;
};

/// Dense per-pixel force field.
struct VectorField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;

  VectorField() = default;
  VectorField(int w, int h) : width(w), height(h), u(static_cast<std::size_t>(w) * h), v(u.size()) {}

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  Point2 at(int x, int y) const { return {u[index(x, y)], v[index(x, y)]}; }
  /// Bilinear sample, clamped to the grid.
  Point2 sample(double x, double y) const;
};

/// Outer marching-squares boundary of the largest 8-connected component,
/// resampled to unit arc-length spacing, keeping every stride-th point. The stride is halved until at least 3 points
/// remain. Points are clamped into the mask grid.
Contour discretize_perimeter(const BinaryMask& mask, int stride);

/// Gradient vector flow of an edge-energy image. `residuals`, when given,
/// receives the L2 norm of each iteration's update.
VectorField gvf(const RealImage& edge_energy, double mu, int iterations,
                std::vector<double>* residuals = nullptr);

/// Unit-length copy of the field; zero vectors stay zero.
VectorField normalize_field(const VectorField& field);

struct EvolveResult {
  Contour contour;
  /// Largest point displacement during the final iteration.
  double last_displacement = 0.0;
};

/// Semi-implicit snake evolution with tension, rigidity, external field and
/// balloon forces. Integer translations of contour and field translate the
/// result exactly.
EvolveResult evolve_traced(const Contour& contour, const VectorField& field, const SnakeConfig& cfg);
Contour evolve(const Contour& contour, const VectorField& field, const SnakeConfig& cfg);

/// Even-odd scanline fill; pixel (x, y) is inside when its center is, with
/// half-open edges.
BinaryMask contour_to_mask(const Contour& contour, int width, int height);

/// Resamples a closed contour to `n` points evenly spaced by arc length,
/// starting at its first point.
Contour resample_closed(const Contour& contour, std::size_t n);

}  // namespace palynseg
