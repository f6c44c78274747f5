#include "palynseg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace palynseg {

namespace {

namespace pt = boost::property_tree;

template <typename T>
void parse_number(const std::string& s, T& out, const char* what) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError(std::string("expected ") + what + ", got '" + s + "'");
}

void parse_value(const std::string& s, int& out) { parse_number(s, out, "an integer"); }
void parse_value(const std::string& s, std::uint64_t& out) { parse_number(s, out, "an unsigned integer"); }
void parse_value(const std::string& s, double& out) { parse_number(s, out, "a number"); }
void parse_value(const std::string& s, std::string& out) { out = s; }

void parse_value(const std::string& s, bool& out) {
  std::string v = s;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    out = true;
  } else if (v == "false" || v == "0" || v == "no" || v == "off") {
    out = false;
  } else {
    throw ConfigError("expected a boolean, got '" + s + "'");
  }
}

void parse_value(const std::string& s, ThresholdMode& out) {
  if (s == "otsu") {
    out = ThresholdMode::Otsu;
  } else if (s == "fixed") {
    out = ThresholdMode::Fixed;
  } else {
    throw ConfigError("expected otsu or fixed, got '" + s + "'");
  }
}

void parse_value(const std::string& s, GradientSource& out) {
  if (s == "preprocessed") {
    out = GradientSource::Preprocessed;
  } else if (s == "raw") {
    out = GradientSource::Raw;
  } else {
    throw ConfigError("expected preprocessed or raw, got '" + s + "'");
  }
}

void parse_value(const std::string& s, InteriorStyle& out) {
  try {
    out = interior_style_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

using Value = std::variant<bool, int, double, std::string>;

Value to_value(bool v) { return v; }
Value to_value(int v) { return v; }
Value to_value(double v) { return v; }
Value to_value(std::uint64_t v) { return std::to_string(v); }
Value to_value(const std::string& v) { return v; }
Value to_value(ThresholdMode m) { return std::string(m == ThresholdMode::Otsu ? "otsu" : "fixed"); }
Value to_value(GradientSource g) { return std::string(g == GradientSource::Preprocessed ? "preprocessed" : "raw"); }
Value to_value(InteriorStyle s) { return std::string(to_string(s)); }

std::string format_value(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, int>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(x);
        } else {
          return x;
        }
      },
      v);
}

template <typename C, typename F>
void visit_config(C& c, F&& f) {
  f("preproc", "clahe_tile", c.preproc.clahe_tile);
  f("preproc", "clahe_clip", c.preproc.clahe_clip);
  f("preproc", "median_radius", c.preproc.median_radius);
  f("preproc", "pm_iterations", c.preproc.pm_iterations);
  f("preproc", "pm_kappa", c.preproc.pm_kappa);
  f("preproc", "pm_lambda", c.preproc.pm_lambda);
  f("preproc", "sobel_threshold_mode", c.preproc.sobel_threshold_mode);
  f("preproc", "sobel_fixed_threshold", c.preproc.sobel_fixed_threshold);
  f("morpho", "cleanup_se_radius", c.morpho.cleanup_se_radius);
  f("morpho", "open_first", c.morpho.open_first);
  f("coarse", "circularity_max", c.coarse.circularity_max);
  f("coarse", "sd_min", c.coarse.sd_min);
  f("coarse", "min_area", c.coarse.min_area);
  f("coarse", "kmeans_max_iter", c.coarse.kmeans_max_iter);
  f("coarse", "kmeans_tol", c.coarse.kmeans_tol);
  f("coarse", "reject_border_touching", c.coarse.reject_border_touching);
  f("coarse", "foreground_dark", c.coarse.foreground_dark);
  f("coarse", "cluster_elongation", c.cluster_elongation);
  f("snake", "iterations", c.snake.iterations);
  f("snake", "sample_stride", c.snake.sample_stride);
  f("snake", "alpha", c.snake.alpha);
  f("snake", "beta", c.snake.beta);
  f("snake", "gamma", c.snake.gamma);
  f("snake", "kappa_gvf", c.snake.kappa_gvf);
  f("snake", "kappa_balloon", c.snake.kappa_balloon);
  f("snake", "resample_every", c.snake.resample_every);
  f("snake", "resample_spacing", c.snake.resample_spacing);
  f("snake", "gradient_source", c.gradient_source);
  f("gvf", "mu", c.snake.gvf_mu);
  f("gvf", "iterations", c.snake.gvf_iterations);
  f("gvf", "normalize", c.snake.normalize_gvf);
  f("exine", "tau_r", c.exine.tau_r);
  f("exine", "erosion_se_radius", c.exine.erosion_se_radius);
  f("exine", "min_exine_px", c.exine.min_exine_px);
  f("exine", "max_exine_fraction", c.exine.max_exine_fraction);
  f("exine", "snake_on_diffused", c.exine.snake_on_diffused);
  f("exine", "snake_balloon", c.exine.snake_balloon);
  f("exine", "snake_normalize_gvf", c.exine.snake_normalize_gvf);
  f("pipeline", "crop_margin", c.crop_margin);
  f("pipeline", "jobs", c.jobs);
  f("score", "iou_threshold", c.score_iou_threshold);
  f("output", "overlay", c.output.overlay);
  f("output", "grain_files", c.output.grain_files);
  f("output", "timestamp", c.output.timestamp);
}

template <typename C, typename F>
void visit_phantom(C& s, F&& f) {
  f("name", s.name);
  f("width", s.width);
  f("height", s.height);
  f("background_mean", s.background_mean);
  f("background_sd", s.background_sd);
  f("rng_seed", s.rng_seed);
  f("allow_overlap", s.allow_overlap);
}

template <typename C, typename F>
void visit_grain(C& g, F&& f) {
  f("center_x", g.center.x);
  f("center_y", g.center.y);
  f("inner_radius", g.inner_radius);
  f("exine_thickness", g.exine_thickness);
  f("interior_style", g.interior_style);
  f("interior_mean", g.interior_mean);
  f("interior_sd", g.interior_sd);
  f("exine_mean", g.exine_mean);
  f("exine_sd", g.exine_sd);
  f("edge_density", g.edge_density);
  f("texture_cell", g.texture_cell);
  f("pattern_period", g.pattern_period);
}

template <typename C, typename F>
void visit_debris(C& d, F&& f) {
  f("center_x", d.center.x);
  f("center_y", d.center.y);
  f("radius", d.radius);
  f("intensity", d.intensity);
}

template <typename C, typename F>
void visit_smudge(C& s, F&& f) {
  f("center_x", s.center.x);
  f("center_y", s.center.y);
  f("length", s.length);
  f("width", s.width);
  f("angle_deg", s.angle_deg);
  f("intensity", s.intensity);
}

pt::ptree read_tree(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [name, section] : tree) {
    if (section.empty()) throw ConfigError("key '" + name + "' outside of any section");
  }
  return tree;
}

// Fills `target` from one section through a (key, field) visitor.
template <typename T, typename Visit>
void apply_section(const std::string& section_name, const pt::ptree& section, T& target, Visit visit) {
  for (const auto& [key, node] : section) {
    bool found = false;
    const std::string value = node.data();
    visit(target, [&](const char* k, auto& field) {
      if (key == k) {
        try {
          parse_value(value, field);
        } catch (const ConfigError& e) {
          throw ConfigError("[" + section_name + "] " + key + ": " + e.what());
        }
        found = true;
      }
    });
    if (!found) throw ConfigError("unknown key '" + key + "' in section [" + section_name + "]");
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return in;
}

// "grain 3" -> 3
int section_index(const std::string& name, const std::string& prefix) {
  int idx = 0;
  parse_value(name.substr(prefix.size()), idx);
  return idx;
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    preproc.validate();
    morpho.validate();
    coarse.validate();
    snake.validate();
    exine.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (crop_margin < 0) throw ConfigError("crop_margin must be >= 0");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(cluster_elongation >= 1.0)) throw ConfigError("cluster_elongation must be >= 1");
  if (!(score_iou_threshold > 0.0 && score_iou_threshold <= 1.0)) {
    throw ConfigError("score iou_threshold must be in (0, 1]");
  }
}

std::vector<ConfigValue> config_values(const PipelineConfig& cfg) {
  std::vector<ConfigValue> out;
  visit_config(cfg, [&](const char* section, const char* key, const auto& field) {
    out.push_back({section, key, to_value(field)});
  });
  return out;
}

PipelineConfig parse_config(std::istream& in) {
  const pt::ptree tree = read_tree(in);
  PipelineConfig cfg;
  for (const auto& [section, node] : tree) {
    for (const auto& [key, value] : node) {
      bool found = false;
      visit_config(cfg, [&](const char* s, const char* k, auto& field) {
        if (section == s && key == k) {
          try {
            parse_value(value.data(), field);
          } catch (const ConfigError& e) {
            throw ConfigError("[" + section + "] " + key + ": " + e.what());
          }
          found = true;
        }
      });
      if (!found) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_config(in);
}

void write_config(std::ostream& out, const PipelineConfig& cfg) {
  std::string current;
  for (const auto& v : config_values(cfg)) {
    if (v.section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << v.section << "]\n";
      current = v.section;
    }
    out << v.key << " = " << format_value(v.value) << '\n';
  }
}

PhantomSpec parse_phantom_spec(std::istream& in) {
  const pt::ptree tree = read_tree(in);
  PhantomSpec spec;
  std::map<int, PhantomGrain> grains;
  std::map<int, PhantomDebris> debris;
  std::map<int, PhantomSmudge> smudges;
  auto grain_visit = [](auto& t, auto&& f) { visit_grain(t, f); };
  auto debris_visit = [](auto& t, auto&& f) { visit_debris(t, f); };
  auto smudge_visit = [](auto& t, auto&& f) { visit_smudge(t, f); };
  for (const auto& [name, section] : tree) {
    if (name == "phantom") {
      apply_section(name, section, spec, [](auto& t, auto&& f) { visit_phantom(t, f); });
    } else if (name.starts_with("grain ")) {
      const int i = section_index(name, "grain ");
      if (grains.contains(i)) throw ConfigError("duplicate section [" + name + "]");
      apply_section(name, section, grains[i], grain_visit);
    } else if (name.starts_with("debris ")) {
      const int i = section_index(name, "debris ");
      if (debris.contains(i)) throw ConfigError("duplicate section [" + name + "]");
      apply_section(name, section, debris[i], debris_visit);
    } else if (name.starts_with("smudge ")) {
      const int i = section_index(name, "smudge ");
      if (smudges.contains(i)) throw ConfigError("duplicate section [" + name + "]");
      apply_section(name, section, smudges[i], smudge_visit);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  for (auto& [i, g] : grains) spec.grains.push_back(g);
  for (auto& [i, d] : debris) spec.debris.push_back(d);
  for (auto& [i, s] : smudges) spec.smudges.push_back(s);
  try {
    spec.validate();
  } catch (const SpecOverlap&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_phantom_spec(in);
}

void write_phantom_spec(std::ostream& out, const PhantomSpec& spec) {
  auto emit = [&](const char* key, const auto& field) { out << key << " = " << format_value(to_value(field)) << '\n'; };
  out << "[phantom]\n";
  visit_phantom(spec, emit);
  for (std::size_t i = 0; i < spec.grains.size(); ++i) {
    out << "\n[grain " << i + 1 << "]\n";
    visit_grain(spec.grains[i], emit);
  }
  for (std::size_t i = 0; i < spec.debris.size(); ++i) {
    out << "\n[debris " << i + 1 << "]\n";
    visit_debris(spec.debris[i], emit);
  }
  for (std::size_t i = 0; i < spec.smudges.size(); ++i) {
    out << "\n[smudge " << i + 1 << "]\n";
    visit_smudge(spec.smudges[i], emit);
  }
}

}  // namespace palynseg
