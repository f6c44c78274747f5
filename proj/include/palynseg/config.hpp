#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "palynseg/coarse.hpp"
#include "palynseg/exine.hpp"
#include "palynseg/phantom.hpp"
#include "palynseg/preproc.hpp"
#include "palynseg/snake.hpp"

namespace palynseg {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Image the grain snake's edge energy is computed from.
enum class GradientSource { Preprocessed, Raw };

struct OutputConfig {
  bool overlay = true;
  bool grain_files = true;
  /// Adds a wall-clock timestamp to reports, which makes them non-reproducible.
  bool timestamp = false;
};

struct PipelineConfig {
  PreprocConfig preproc;
  MorphoConfig morpho;
  CoarseConfig coarse;
  SnakeConfig snake;
  ExineConfig exine;
  int crop_margin = 20;
  GradientSource gradient_source = GradientSource::Preprocessed;
  /// Accepted components with a larger principal-axis ratio are flagged as
  /// possible clusters of touching grains.
  double cluster_elongation = 1.3;
  int jobs = 1;
  double score_iou_threshold = 0.7;
  OutputConfig output;

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
};

struct ConfigValue {
  std::string section;
  std::string key;
  std::variant<bool, int, double, std::string> value;
};

/// Every setting in file order.
std::vector<ConfigValue> config_values(const PipelineConfig& cfg);

/// Flat-section INI. Omitted keys keep their defaults; unknown sections or
/// keys and malformed values raise ConfigError.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& out, const PipelineConfig& cfg);

/// Sections [phantom], [grain N], [debris N] and [smudge N].
PhantomSpec parse_phantom_spec(std::istream& in);
PhantomSpec load_phantom_spec(const std::filesystem::path& path);
void write_phantom_spec(std::ostream& out, const PhantomSpec& spec);

}  // namespace palynseg
