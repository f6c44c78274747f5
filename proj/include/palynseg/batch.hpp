#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "palynseg/config.hpp"
#include "palynseg/phantom.hpp"

namespace palynseg {

enum class ImageStatus { Ok, Error, Skipped };

struct BatchImageResult {
  std::string file;
  ImageStatus status = ImageStatus::Ok;
  std::size_t grains = 0;
  std::string message;
};

struct BatchSummary {
  std::size_t images_processed = 0;
  std::size_t grains_found = 0;
  std::size_t errors = 0;
  std::size_t skipped = 0;
  /// Sorted by file name.
  std::vector<BatchImageResult> images;
};

nlohmann::json summary_json(const BatchSummary& s);

/// Segments one image file or every image in a directory (non-recursive) and
/// writes reports, overlays, per-grain files and summary.json to
/// `output_dir`. Unreadable images are counted as errors; files without an
/// image extension are skipped. Throws OutputError when outputs cannot be
/// written. Warnings go to `log` when given.
BatchSummary run_batch(const std::filesystem::path& input, const std::filesystem::path& output_dir,
                       const PipelineConfig& cfg, std::ostream* log = nullptr);

/// Writes `<name>.png`, `<name>.truth.json` and the full-size truth masks in
/// `<name>.truth/`.
void write_phantom(const PhantomSpec& spec, const std::filesystem::path& output_dir);

/// Scores every `<stem>.truth.json` in `truth_dir` against
/// `<stem>.report.json` in `results_dir`; a missing report scores as an
/// empty result.
nlohmann::json score_directories(const std::filesystem::path& results_dir, const std::filesystem::path& truth_dir,
                                 double iou_threshold);

}  // namespace palynseg
