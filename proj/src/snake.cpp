#include "palynseg/snake.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace palynseg {

void SnakeConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("snake.iterations must be >= 1");
  if (sample_stride < 1) throw std::invalid_argument("snake.sample_stride must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("snake.gamma must be > 0");
  if (!(gvf_mu > 0.0)) throw std::invalid_argument("gvf.mu must be > 0");
  if (gvf_iterations < 0) throw std::invalid_argument("gvf.iterations must be >= 0");
  if (resample_every < 1) throw std::invalid_argument("snake.resample_every must be >= 1");
  if (!(resample_spacing > 0.0)) throw std::invalid_argument("snake.resample_spacing must be > 0");
}

Point2 VectorField::sample(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  auto lerp2 = [&](const std::vector<double>& f) {
    const double top = (1.0 - fx) * f[index(x0, y0)] + fx * f[index(x1, y0)];
    const double bot = (1.0 - fx) * f[index(x0, y1)] + fx * f[index(x1, y1)];
    return (1.0 - fy) * top + fy * bot;
  };
  return {lerp2(u), lerp2(v)};
}

Contour discretize_perimeter(const BinaryMask& mask, int stride) {
  if (stride < 1) throw std::invalid_argument("discretize_perimeter: stride must be >= 1");
  Labeling lab = connected_components(mask, Connectivity::Eight);
  if (lab.components.empty()) throw EmptyInput();
  const auto largest = std::max_element(lab.components.begin(), lab.components.end(),
                                        [](const Component& a, const Component& b) {
                                          return a.pixels.size() < b.pixels.size();
                                        });
  const BinaryMask only = mask_from_pixels(largest->pixels, mask.width(), mask.height());
  Contour full = outer_boundary(only);
  for (auto& p : full.points) {
    p.x = std::clamp(p.x, 0.0, static_cast<double>(mask.width() - 1));
    p.y = std::clamp(p.y, 0.0, static_cast<double>(mask.height() - 1));
  }
  full.dedupe();
  if (full.size() < 3) throw TooFewPoints();
  // Unit arc-length spacing, so the stride counts pixels along the boundary.
  full = resample_closed(full, std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(full.length()))));

  for (int s = stride;; s = std::max(1, s / 2)) {
    Contour out;
    for (std::size_t i = 0; i < full.size(); i += static_cast<std::size_t>(s)) {
      out.points.push_back(full.points[i]);
    }
    if (out.size() >= 3 || s == 1) return out;
  }
}

VectorField gvf(const RealImage& edge_energy, double mu, int iterations, std::vector<double>* residuals) {
  if (edge_energy.channels() != 1) throw std::invalid_argument("gvf: expected 1 channel");
  if (!(mu > 0.0)) throw std::invalid_argument("gvf: mu must be > 0");
  const int w = edge_energy.width();
  const int h = edge_energy.height();
  VectorField f(w, h);
  std::vector<double> mag2(f.u.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (edge_energy.clamped(x + 1, y) - edge_energy.clamped(x - 1, y));
      const double gy = 0.5 * (edge_energy.clamped(x, y + 1) - edge_energy.clamped(x, y - 1));
      const std::size_t i = f.index(x, y);
      f.u[i] = gx;
      f.v[i] = gy;
      mag2[i] = gx * gx + gy * gy;
    }
  }
  const std::vector<double> fx = f.u;
  const std::vector<double> fy = f.v;
  const double dt = 0.25 / mu;
  VectorField next(w, h);
  if (residuals) residuals->clear();

  for (int it = 0; it < iterations; ++it) {
    double res = 0.0;
    for (int y = 0; y < h; ++y) {
      const std::size_t up = f.index(0, y > 0 ? y - 1 : y);
      const std::size_t dn = f.index(0, y < h - 1 ? y + 1 : y);
      const std::size_t row = f.index(0, y);
      for (int x = 0; x < w; ++x) {
        const int xl = x > 0 ? x - 1 : x;
        const int xr = x < w - 1 ? x + 1 : x;
        const std::size_t i = row + x;
        const double lu = f.u[row + xl] + f.u[row + xr] + f.u[up + x] + f.u[dn + x] - 4.0 * f.u[i];
        const double lv = f.v[row + xl] + f.v[row + xr] + f.v[up + x] + f.v[dn + x] - 4.0 * f.v[i];
        // Semi-implicit in the coupling term.
        const double denom = 1.0 + dt * mag2[i];
        next.u[i] = (f.u[i] + dt * (mu * lu + fx[i] * mag2[i])) / denom;
        next.v[i] = (f.v[i] + dt * (mu * lv + fy[i] * mag2[i])) / denom;
        const double du = next.u[i] - f.u[i];
        const double dv = next.v[i] - f.v[i];
        res += du * du + dv * dv;
      }
    }
    std::swap(f.u, next.u);
    std::swap(f.v, next.v);
    if (residuals) residuals->push_back(std::sqrt(res));
  }
  return f;
}

VectorField normalize_field(const VectorField& field) {
  VectorField out = field;
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    const double m = std::hypot(out.u[i], out.v[i]);
    if (m > 0.0) {
      out.u[i] /= m;
      out.v[i] /= m;
    }
  }
  return out;
}

Contour resample_closed(const Contour& contour, std::size_t n) {
  const auto& pts = contour.points;
  const std::size_t m = pts.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const Point2& a = pts[i];
    const Point2& b = pts[(i + 1) % m];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double total = cum[m];
  Contour out;
  if (!(total > 0.0)) return contour;
  out.points.reserve(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n);
    while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
    const Point2& a = pts[seg];
    const Point2& b = pts[(seg + 1) % m];
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.points.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

namespace {

// First row of (I + gamma * A)^-1, where A is the periodic pentadiagonal
// internal-energy matrix. The matrix is circulant, so its inverse is too and
// follows from the eigenvalues 1 + gamma * (2a(1 - cos t) + 4b(1 - cos t)^2).
std::vector<double> circulant_inverse(std::size_t n, const SnakeConfig& cfg) {
  std::vector<double> eig(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = 1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    eig[k] = 1.0 + cfg.gamma * (2.0 * cfg.alpha * c + 4.0 * cfg.beta * c * c);
    if (!std::isfinite(eig[k]) || std::abs(eig[k]) < 1e-10) throw SingularSystem();
  }
  std::vector<double> row(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t phase = (j * k) % n;
      acc += std::cos(2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n)) / eig[k];
    }
    row[j] = acc / static_cast<double>(n);
    if (!std::isfinite(row[j])) throw SingularSystem();
  }
  return row;
}

constexpr double kGrid = 65536.0;

double quantize(double v) { return std::round(v * kGrid) / kGrid; }

}  // namespace

EvolveResult evolve_traced(const Contour& contour, const VectorField& field, const SnakeConfig& cfg) {
  cfg.validate();
  if (contour.size() < 3) throw TooFewPoints();
  if (field.width < 1 || field.height < 1) throw std::invalid_argument("evolve: empty field");

  // All arithmetic runs relative to an integer origin on a 2^-16 grid, which
  // makes integer translations exact.
  double minx = contour.points[0].x;
  double miny = contour.points[0].y;
  for (const auto& p : contour.points) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
  }
  const int ox = static_cast<int>(std::floor(minx));
  const int oy = static_cast<int>(std::floor(miny));
  const double lo_x = -ox;
  const double lo_y = -oy;
  const double hi_x = field.width - 1 - ox;
  const double hi_y = field.height - 1 - oy;

  Contour local;
  for (const auto& p : contour.points) local.points.push_back({quantize(p.x - ox), quantize(p.y - oy)});
  local.dedupe();
  if (local.size() < 3) throw TooFewPoints();

  auto sample = [&](const Point2& p) -> Point2 {
    const double cx = std::clamp(p.x, lo_x, hi_x);
    const double cy = std::clamp(p.y, lo_y, hi_y);
    const double flx = std::floor(cx);
    const double fly = std::floor(cy);
    const int x0 = ox + static_cast<int>(flx);
    const int y0 = oy + static_cast<int>(fly);
    const int x1 = std::min(x0 + 1, field.width - 1);
    const int y1 = std::min(y0 + 1, field.height - 1);
    const double tx = cx - flx;
    const double ty = cy - fly;
    auto lerp2 = [&](const std::vector<double>& f) {
      const double top = (1.0 - tx) * f[field.index(x0, y0)] + tx * f[field.index(x1, y0)];
      const double bot = (1.0 - tx) * f[field.index(x0, y1)] + tx * f[field.index(x1, y1)];
      return (1.0 - ty) * top + ty * bot;
    };
    return {lerp2(field.u), lerp2(field.v)};
  };

  std::size_t n = 0;
  std::vector<double> inv;
  std::vector<Point2> rhs;
  EvolveResult result;

  for (int it = 0; it < cfg.iterations; ++it) {
    if (it % cfg.resample_every == 0) {
      if (n == 0) {
        n = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(local.length() / cfg.resample_spacing)));
        inv = circulant_inverse(n, cfg);
        rhs.resize(n);
      }
      local = resample_closed(local, n);
      if (local.size() != n) throw TooFewPoints();
    }

    const double orient = local.signed_area() >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = local.points[i];
      const Point2& prev = local.points[(i + n - 1) % n];
      const Point2& next = local.points[(i + 1) % n];
      Point2 f = sample(p);
      f.x *= cfg.kappa_gvf;
      f.y *= cfg.kappa_gvf;
      const double tx = next.x - prev.x;
      const double ty = next.y - prev.y;
      const double tl = std::hypot(tx, ty);
      if (tl > 0.0 && cfg.kappa_balloon != 0.0) {
        f.x += cfg.kappa_balloon * orient * ty / tl;
        f.y -= cfg.kappa_balloon * orient * tx / tl;
      }
      rhs[i] = {p.x + cfg.gamma * f.x, p.y + cfg.gamma * f.y};
    }

    double max_move = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ax = 0.0;
      double ay = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const Point2& r = rhs[(i + n - j) % n];
        ax += inv[j] * r.x;
        ay += inv[j] * r.y;
      }
      ax = std::clamp(ax, lo_x, hi_x);
      ay = std::clamp(ay, lo_y, hi_y);
      Point2& p = local.points[i];
      max_move = std::max(max_move, std::hypot(ax - p.x, ay - p.y));
      p = {ax, ay};
    }
    result.last_displacement = max_move;
  }

  for (const auto& p : local.points) {
    result.contour.points.push_back({quantize(p.x) + ox, quantize(p.y) + oy});
  }
  result.contour.dedupe();
  if (result.contour.size() < 3) throw TooFewPoints();
  return result;
}

Contour evolve(const Contour& contour, const VectorField& field, const SnakeConfig& cfg) {
  return evolve_traced(contour, field, cfg).contour;
}

BinaryMask contour_to_mask(const Contour& contour, int width, int height) {
  BinaryMask out(width, height);
  const auto& pts = contour.points;
  const std::size_t n = pts.size();
  if (n < 3) return out;
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    const double sy = y;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = pts[i];
      const Point2& b = pts[(i + 1) % n];
      if ((a.y <= sy && sy < b.y) || (b.y <= sy && sy < a.y)) {
        xs.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int from = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int to = std::min(width, static_cast<int>(std::ceil(xs[k + 1])));
      for (int x = from; x < to; ++x) out.set(x, y);
    }
  }
  return out;
}

}  // namespace palynseg
