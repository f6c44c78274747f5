#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "palynseg/batch.hpp"
#include "palynseg/config.hpp"
#include "palynseg/imageio.hpp"
#include "palynseg/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOutput = 3;

palynseg::PipelineConfig load_or_default(const std::string& path) {
  return path.empty() ? palynseg::PipelineConfig{} : palynseg::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pollen grain and exine segmentation for bright-field microscope images"};
  app.set_version_flag("--version", std::string("palynseg ") + std::string(palynseg::version()));
  app.require_subcommand(1);

  std::string input, output, config_path;
  std::optional<bool> overlay;
  std::optional<int> jobs;
  auto* segment = app.add_subcommand("segment", "Segment grains in an image or a directory of images");
  segment->add_option("--input", input, "Image file or directory")->required();
  segment->add_option("--output", output, "Output directory")->required();
  segment->add_option("--config", config_path, "Configuration file");
  segment->add_flag("--overlay,!--no-overlay", overlay, "Write overlay images");
  segment->add_option("--jobs", jobs, "Images processed concurrently")->check(CLI::PositiveNumber);

  std::string spec_path, phantom_out;
  std::optional<std::uint64_t> seed;
  auto* phantom = app.add_subcommand("phantom", "Render a synthetic phantom and its ground truth");
  auto* spec_opt = phantom->add_option("--spec", spec_path, "Phantom spec file");
  phantom->add_option("--seed", seed, "Render a random 1024x1024 scene instead of a spec")->excludes(spec_opt);
  phantom->add_option("--output", phantom_out, "Output directory")->required();

  std::string results_dir, truth_dir, score_config;
  auto* score = app.add_subcommand("score", "Score segmentation reports against phantom ground truth");
  score->add_option("--results", results_dir, "Directory of reports")->required();
  score->add_option("--truth", truth_dir, "Directory of phantom truth")->required();
  score->add_option("--config", score_config, "Configuration file (for the match threshold)");

  bool defaults = false;
  auto* config = app.add_subcommand("config", "Print configuration");
  config->add_flag("--defaults", defaults, "Print every setting with its default value")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*segment) {
      palynseg::PipelineConfig cfg = load_or_default(config_path);
      if (overlay) cfg.output.overlay = *overlay;
      if (jobs) cfg.jobs = *jobs;
      cfg.validate();
      const auto s = palynseg::run_batch(input, output, cfg, &std::cerr);
      std::cout << "processed " << s.images_processed << " image(s), " << s.grains_found << " grain(s), " << s.errors
                << " error(s), " << s.skipped << " skipped\n";
    } else if (*phantom) {
      palynseg::PhantomSpec spec;
      if (seed) {
        spec = palynseg::random_phantom_spec(*seed);
      } else if (!spec_path.empty()) {
        spec = palynseg::load_phantom_spec(spec_path);
      } else {
        std::cerr << "palynseg: phantom needs --spec or --seed\n";
        return kExitConfig;
      }
      palynseg::write_phantom(spec, phantom_out);
    } else if (*score) {
      const palynseg::PipelineConfig cfg = load_or_default(score_config);
      std::cout << palynseg::dump(palynseg::score_directories(results_dir, truth_dir, cfg.score_iou_threshold));
    } else if (*config) {
      palynseg::write_config(std::cout, palynseg::PipelineConfig{});
    }
  } catch (const palynseg::ConfigError& e) {
    std::cerr << "palynseg: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const palynseg::SpecOverlap& e) {
    std::cerr << "palynseg: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const palynseg::OutputError& e) {
    std::cerr << "palynseg: output error: " << e.what() << '\n';
    return kExitOutput;
  } catch (const std::exception& e) {
    std::cerr << "palynseg: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
