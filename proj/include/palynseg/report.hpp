#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "palynseg/config.hpp"
#include "palynseg/phantom.hpp"
#include "palynseg/pipeline.hpp"

namespace palynseg {

std::string_view version();

struct ImageInfo {
  std::string file;
  std::string stem;
  int width = 0;
  int height = 0;
  int channels = 1;
};

/// Per-grain output file names, relative to the output directory.
struct GrainFiles {
  std::string image;
  std::string grain_mask;
  std::string exine_mask;
  std::string inner_mask;
};
GrainFiles grain_files(const std::string& stem, int id);

nlohmann::json config_json(const PipelineConfig& cfg);
nlohmann::json report_json(const SegmentationResult& result, const ImageInfo& info, const PipelineConfig& cfg);
/// Pretty-printed with a trailing newline.
std::string dump(const nlohmann::json& j);

/// Rebuilds grain records from a report, reading the mask files next to it.
std::vector<GrainRecord> load_report_records(const nlohmann::json& report, const std::filesystem::path& dir);

nlohmann::json truth_json(const PhantomSpec& spec, const PhantomTruth& truth);
/// Reads `<stem>.truth.json` and the mask files in `<stem>.truth/`.
PhantomTruth load_truth(const std::filesystem::path& truth_json_path);

nlohmann::json score_json(const ScoreReport& score);

}  // namespace palynseg
