#include "palynseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace palynseg {

std::string_view to_string(InteriorStyle s) {
  switch (s) {
    case InteriorStyle::Smooth: return "smooth";
    case InteriorStyle::Speckled: return "speckled";
    case InteriorStyle::Patterned: return "patterned";
  }
  return "smooth";
}

InteriorStyle interior_style_from_string(std::string_view s) {
  if (s == "smooth") return InteriorStyle::Smooth;
  if (s == "speckled") return InteriorStyle::Speckled;
  if (s == "patterned") return InteriorStyle::Patterned;
  throw std::invalid_argument("unknown interior style: " + std::string(s));
}

void PhantomSpec::validate() const {
  if (width < 1 || height < 1) throw std::invalid_argument("phantom: width and height must be >= 1");
  if (background_sd < 0.0) throw std::invalid_argument("phantom: background_sd must be >= 0");
  for (const auto& g : grains) {
    if (!(g.inner_radius > 0.0)) throw std::invalid_argument("phantom: inner_radius must be > 0");
    if (g.exine_thickness < 2.0) throw std::invalid_argument("phantom: exine_thickness must be >= 2");
    if (g.edge_density < 0.0 || g.edge_density > 1.0) {
      throw std::invalid_argument("phantom: edge_density must be in [0, 1]");
    }
    if (g.texture_cell < 1) throw std::invalid_argument("phantom: texture_cell must be >= 1");
    if (!(g.pattern_period > 0.0)) throw std::invalid_argument("phantom: pattern_period must be > 0");
  }
  for (const auto& d : debris) {
    if (!(d.radius > 0.0) || d.radius > 8.0) throw std::invalid_argument("phantom: debris radius must be in (0, 8]");
  }
  for (const auto& s : smudges) {
    if (!(s.length > 0.0) || !(s.width > 0.0)) throw std::invalid_argument("phantom: smudge size must be > 0");
  }
  if (!allow_overlap) {
    for (std::size_t i = 0; i < grains.size(); ++i) {
      for (std::size_t j = i + 1; j < grains.size(); ++j) {
        const double d = std::hypot(grains[i].center.x - grains[j].center.x, grains[i].center.y - grains[j].center.y);
        if (d < grains[i].outer_radius() + grains[j].outer_radius()) throw SpecOverlap();
      }
    }
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Counter-based uniform in [0, 1): a pure function of its arguments.
double hash_uniform(std::uint64_t seed, std::uint64_t a, std::int64_t b, std::int64_t c) {
  std::uint64_t h = splitmix64(seed ^ 0x5bd1e995ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ static_cast<std::uint64_t>(b));
  h = splitmix64(h ^ static_cast<std::uint64_t>(c));
  return unit_from_bits(h);
}

// Box-Muller over mt19937_64, so streams are identical on every platform.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return unit_from_bits(rng_()); }

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

constexpr int kSuper = 4;

// Fractions of the pixel footprint within distance r_outer and r_inner of c.
void disk_coverage(double px, double py, Point2 c, double r_outer, double r_inner, double& cov_out, double& cov_in) {
  const double d = std::hypot(px - c.x, py - c.y);
  constexpr double kReach = 0.75;  // > half the pixel diagonal
  const bool near_out = std::abs(d - r_outer) < kReach;
  const bool near_in = std::abs(d - r_inner) < kReach;
  if (!near_out && !near_in) {
    cov_out = d <= r_outer ? 1.0 : 0.0;
    cov_in = d <= r_inner ? 1.0 : 0.0;
    return;
  }
  int n_out = 0;
  int n_in = 0;
  for (int sy = 0; sy < kSuper; ++sy) {
    for (int sx = 0; sx < kSuper; ++sx) {
      const double x = px - 0.5 + (sx + 0.5) / kSuper;
      const double y = py - 0.5 + (sy + 0.5) / kSuper;
      const double dd = std::hypot(x - c.x, y - c.y);
      n_out += dd <= r_outer;
      n_in += dd <= r_inner;
    }
  }
  cov_out = static_cast<double>(n_out) / (kSuper * kSuper);
  cov_in = static_cast<double>(n_in) / (kSuper * kSuper);
}

// Gaussian-blurred white noise over a w x h patch, rescaled to unit SD.
std::vector<double> smooth_noise(int w, int h, double sigma, std::uint64_t seed) {
  Gaussian g(seed);
  std::vector<double> a(static_cast<std::size_t>(w) * h);
  for (double& v : a) v = g();
  const int rad = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * rad + 1);
  double ks = 0.0;
  for (int i = -rad; i <= rad; ++i) ks += k[i + rad] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= ks;
  std::vector<double> b(a.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -rad; i <= rad; ++i) acc += k[i + rad] * a[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      b[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -rad; i <= rad; ++i) acc += k[i + rad] * b[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      a[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  double mean = 0.0;
  for (double v : a) mean += v;
  mean /= static_cast<double>(a.size());
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(a.size()));
  for (double& v : a) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return a;
}

void render_grain(std::vector<double>& canvas, int w, int h, const PhantomGrain& g, std::size_t index,
                  std::uint64_t seed) {
  const double r_out = g.outer_radius();
  const double r_in = g.inner_radius;
  const int x0 = std::max(0, static_cast<int>(std::floor(g.center.x - r_out - 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(g.center.y - r_out - 1)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(g.center.x + r_out + 1)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(g.center.y + r_out + 1)));
  if (x0 > x1 || y0 > y1) return;
  const int pw = x1 - x0 + 1;
  const int ph = y1 - y0 + 1;

  std::vector<double> speckle;
  if (g.interior_style == InteriorStyle::Speckled) {
    speckle = smooth_noise(pw, ph, 3.0, splitmix64(seed ^ (0xabcdefULL + index)));
  }
  // Two-level cell texture with zero mean and unit variance.
  const double p = g.edge_density;
  const double hi = p > 0.0 && p < 1.0 ? std::sqrt((1.0 - p) / p) : 0.0;
  const double lo = p > 0.0 && p < 1.0 ? -std::sqrt(p / (1.0 - p)) : 0.0;

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      double cov_out = 0.0;
      double cov_in = 0.0;
      disk_coverage(x, y, g.center, r_out, r_in, cov_out, cov_in);
      if (cov_out <= 0.0) continue;

      const auto cx = static_cast<std::int64_t>(std::floor(static_cast<double>(x) / g.texture_cell));
      const auto cy = static_cast<std::int64_t>(std::floor(static_cast<double>(y) / g.texture_cell));
      const double u = hash_uniform(seed, index, cx, cy);
      const double exine = g.exine_mean + g.exine_sd * (u < p ? hi : lo);

      double interior = g.interior_mean;
      if (g.interior_style == InteriorStyle::Speckled) {
        interior += g.interior_sd * speckle[static_cast<std::size_t>(y - y0) * pw + (x - x0)];
      } else if (g.interior_style == InteriorStyle::Patterned) {
        const double k = 2.0 * std::numbers::pi / g.pattern_period;
        interior += 2.0 * g.interior_sd * std::sin(k * (x - g.center.x)) * std::sin(k * (y - g.center.y));
      }

      double& px = canvas[static_cast<std::size_t>(y) * w + x];
      px = (1.0 - cov_out) * px + (cov_out - cov_in) * exine + cov_in * interior;
    }
  }
}

}  // namespace

Phantom generate(const PhantomSpec& spec) {
  spec.validate();
  const int w = spec.width;
  const int h = spec.height;
  std::vector<double> canvas(static_cast<std::size_t>(w) * h, spec.background_mean);

  for (std::size_t i = 0; i < spec.grains.size(); ++i) render_grain(canvas, w, h, spec.grains[i], i, spec.rng_seed);

  for (const auto& d : spec.debris) {
    for (int y = std::max(0, static_cast<int>(d.center.y - d.radius - 1));
         y <= std::min(h - 1, static_cast<int>(d.center.y + d.radius + 1)); ++y) {
      for (int x = std::max(0, static_cast<int>(d.center.x - d.radius - 1));
           x <= std::min(w - 1, static_cast<int>(d.center.x + d.radius + 1)); ++x) {
        if (std::hypot(x - d.center.x, y - d.center.y) <= d.radius) canvas[static_cast<std::size_t>(y) * w + x] = d.intensity;
      }
    }
  }

  for (const auto& s : spec.smudges) {
    const double a = s.angle_deg * std::numbers::pi / 180.0;
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    const double reach = 0.5 * std::hypot(s.length, s.width) + 1.0;
    for (int y = std::max(0, static_cast<int>(s.center.y - reach)); y <= std::min(h - 1, static_cast<int>(s.center.y + reach)); ++y) {
      for (int x = std::max(0, static_cast<int>(s.center.x - reach)); x <= std::min(w - 1, static_cast<int>(s.center.x + reach)); ++x) {
        const double dx = x - s.center.x;
        const double dy = y - s.center.y;
        const double along = dx * ca + dy * sa;
        const double across = -dx * sa + dy * ca;
        if (std::abs(along) <= s.length / 2.0 && std::abs(across) <= s.width / 2.0) {
          canvas[static_cast<std::size_t>(y) * w + x] = s.intensity;
        }
      }
    }
  }

  Phantom out{Raster(w, h, 1), PhantomTruth{w, h, {}}};
  Gaussian noise(splitmix64(spec.rng_seed));
  auto px = out.image.pixels();
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    const double v = canvas[i] + spec.background_sd * noise();
    px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }

  for (const auto& g : spec.grains) {
    GrainTruth t{g.center, g.inner_radius, g.outer_radius(), BinaryMask(w, h), BinaryMask(w, h), BinaryMask(w, h)};
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double d = std::hypot(x - g.center.x, y - g.center.y);
        if (d <= t.outer_radius) {
          t.grain_mask.set(x, y);
          if (d <= t.inner_radius) {
            t.inner_mask.set(x, y);
          } else {
            t.exine_mask.set(x, y);
          }
        }
      }
    }
    out.truth.grains.push_back(std::move(t));
  }
  return out;
}

PhantomSpec random_phantom_spec(std::uint64_t seed, const RandomPhantomOptions& opts) {
  Gaussian g(splitmix64(seed * 7919 + 17));
  auto uni = [&](double a, double b) { return a + (b - a) * g.uniform(); };

  PhantomSpec spec;
  spec.name = "phantom" + std::to_string(seed);
  spec.width = opts.width;
  spec.height = opts.height;
  spec.rng_seed = seed;
  spec.background_mean = uni(190.0, 215.0);
  spec.background_sd = uni(2.0, opts.max_noise_sd);

  const int wanted = 1 + static_cast<int>(g.uniform() * opts.max_grains);
  for (int attempt = 0; attempt < 400 && static_cast<int>(spec.grains.size()) < wanted; ++attempt) {
    PhantomGrain gr;
    gr.inner_radius = uni(opts.min_inner_radius, opts.max_inner_radius);
    gr.exine_thickness = uni(opts.min_exine, opts.max_exine);
    const double r = gr.outer_radius();
    const double lo = r + opts.spacing;
    if (opts.width - lo <= lo || opts.height - lo <= lo) continue;
    gr.center = {uni(lo, opts.width - lo), uni(lo, opts.height - lo)};
    bool clear = true;
    for (const auto& other : spec.grains) {
      const double d = std::hypot(other.center.x - gr.center.x, other.center.y - gr.center.y);
      if (d < other.outer_radius() + r + opts.spacing) clear = false;
    }
    if (!clear) continue;
    gr.interior_style = static_cast<InteriorStyle>((seed + spec.grains.size()) % 3);
    gr.interior_mean = uni(135.0, 165.0);
    gr.exine_mean = uni(55.0, 85.0);
    gr.exine_sd = uni(35.0, 50.0);
    gr.edge_density = uni(0.4, 0.6);
    switch (gr.interior_style) {
      case InteriorStyle::Smooth: gr.interior_sd = 0.0; break;
      case InteriorStyle::Speckled: gr.interior_sd = uni(8.0, 14.0); break;
      case InteriorStyle::Patterned: gr.interior_sd = uni(6.0, 10.0); gr.pattern_period = uni(20.0, 32.0); break;
    }
    spec.grains.push_back(gr);
  }
  return spec;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("mask_iou: size mismatch");
  const auto x = a.bits();
  const auto y = b.bits();
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inter += x[i] & y[i];
    uni += x[i] | y[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double rms_radial_error(const Contour& contour, Point2 center, double radius) {
  if (contour.points.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (const auto& p : contour.points) {
    const double e = std::hypot(p.x - center.x, p.y - center.y) - radius;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(contour.points.size()));
}

ScoreReport score(std::span<const GrainRecord> records, const PhantomTruth& truth, double iou_threshold) {
  ScoreReport rep;
  const int w = truth.width;
  const int h = truth.height;
  std::vector<BinaryMask> grain_masks;
  grain_masks.reserve(records.size());
  for (const auto& r : records) grain_masks.push_back(place_mask(r.grain_mask, r.offset_x, r.offset_y, w, h));

  std::vector<char> used(records.size(), 0);
  for (std::size_t t = 0; t < truth.grains.size(); ++t) {
    const GrainTruth& gt = truth.grains[t];
    GrainScore s;
    s.truth_index = t;
    double best = -1.0;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const double iou = mask_iou(grain_masks[r], gt.grain_mask);
      if (iou > best) {
        best = iou;
        s.record_index = static_cast<int>(r);
      }
    }
    s.grain_iou = std::max(best, 0.0);
    if (best < iou_threshold || used[static_cast<std::size_t>(s.record_index)]) {
      s.record_index = -1;
      s.grain_rms_radial = s.inner_rms_radial = s.exine_thickness_error = std::numeric_limits<double>::quiet_NaN();
      s.exine_iou = 0.0;
      rep.grains.push_back(s);
      continue;
    }
    const GrainRecord& rec = records[static_cast<std::size_t>(s.record_index)];
    used[static_cast<std::size_t>(s.record_index)] = 1;
    ++rep.matched;
    s.grain_rms_radial = rms_radial_error(rec.grain_contour, gt.center, gt.outer_radius);
    s.inner_rms_radial = rec.inner_contour ? rms_radial_error(*rec.inner_contour, gt.center, gt.inner_radius)
                                           : std::numeric_limits<double>::quiet_NaN();
    s.exine_thickness_error = rec.exine_thickness_est
                                  ? *rec.exine_thickness_est - (gt.outer_radius - gt.inner_radius)
                                  : std::numeric_limits<double>::quiet_NaN();
    s.exine_iou = mask_iou(place_mask(rec.exine_mask, rec.offset_x, rec.offset_y, w, h), gt.exine_mask);
    rep.grains.push_back(s);
  }
  rep.false_positives = records.size() - rep.matched;
  rep.recall = truth.grains.empty() ? 1.0 : static_cast<double>(rep.matched) / static_cast<double>(truth.grains.size());
  return rep;
}

BinaryMask place_mask(const BinaryMask& sub, int offset_x, int offset_y, int width, int height) {
  BinaryMask out(width, height);
  for (int y = 0; y < sub.height(); ++y) {
    for (int x = 0; x < sub.width(); ++x) {
      if (sub.get(x, y) && out.contains(x + offset_x, y + offset_y)) out.set(x + offset_x, y + offset_y);
    }
  }
  return out;
}

}  // namespace palynseg
