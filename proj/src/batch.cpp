#include "palynseg/batch.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "palynseg/imageio.hpp"
#include "palynseg/pipeline.hpp"
#include "palynseg/report.hpp"

namespace palynseg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view status_name(ImageStatus s) {
  switch (s) {
    case ImageStatus::Ok: return "ok";
    case ImageStatus::Error: return "error";
    case ImageStatus::Skipped: return "skipped";
  }
  return "ok";
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
}

void write_png(const fs::path& path, const Raster& img) { write_file_atomic(path, encode_png(img)); }

void write_image_outputs(const Raster& img, const SegmentationResult& result, const ImageInfo& info,
                         const fs::path& out, const PipelineConfig& cfg) {
  if (cfg.output.grain_files) {
    for (const GrainRecord& g : result.grains) {
      const GrainFiles files = grain_files(info.stem, g.id);
      const BBox box{g.offset_x, g.offset_y, g.offset_x + g.sub_width() - 1, g.offset_y + g.sub_height() - 1};
      write_png(out / files.image, crop(img, box, 0).image);
      write_png(out / files.grain_mask, mask_to_raster(g.grain_mask));
      write_png(out / files.exine_mask, mask_to_raster(g.exine_mask));
      write_png(out / files.inner_mask, mask_to_raster(g.inner_mask));
    }
  }
  if (cfg.output.overlay) write_png(out / (info.stem + ".overlay.png"), render_overlay(img, result.grains));
  write_file_atomic(out / (info.stem + ".report.json"), dump(report_json(result, info, cfg)));
}

BatchImageResult process_file(const fs::path& path, const fs::path& out, const PipelineConfig& cfg) {
  BatchImageResult r;
  r.file = path.filename().string();
  if (!is_image_path(path)) {
    r.status = ImageStatus::Skipped;
    r.message = "not an image file";
    return r;
  }
  Raster img;
  try {
    img = read_image(path);
  } catch (const Error& e) {
    r.status = ImageStatus::Error;
    r.message = e.what();
    return r;
  }
  SegmentationResult result;
  try {
    result = segment_image(img, cfg);
  } catch (const std::exception& e) {
    r.status = ImageStatus::Error;
    r.message = std::string("segmentation failed: ") + e.what();
    return r;
  }
  const ImageInfo info{r.file, path.stem().string(), img.width(), img.height(), img.channels()};
  write_image_outputs(img, result, info, out, cfg);
  r.grains = result.grains.size();
  for (const auto& w : result.warnings) r.message += (r.message.empty() ? "" : "; ") + w;
  return r;
}

}  // namespace

json summary_json(const BatchSummary& s) {
  json images = json::array();
  for (const auto& im : s.images) {
    images.push_back(
        {{"file", im.file}, {"status", std::string(status_name(im.status))}, {"grains", im.grains}, {"message", im.message}});
  }
  return {{"images_processed", s.images_processed},
          {"grains_found", s.grains_found},
          {"errors", s.errors},
          {"skipped", s.skipped},
          {"images", std::move(images)}};
}

BatchSummary run_batch(const fs::path& input, const fs::path& output_dir, const PipelineConfig& cfg,
                       std::ostream* log) {
  cfg.validate();
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(input, ec)) {
    for (const auto& entry : fs::directory_iterator(input, ec)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) throw Error("cannot list " + input.string());
  } else if (fs::exists(input, ec)) {
    files.push_back(input);
  } else {
    throw Error("input not found: " + input.string());
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  ensure_directory(output_dir);

  std::vector<BatchImageResult> results(files.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= files.size() || abort) return;
      try {
        results[i] = process_file(files[i], output_dir, cfg);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
      if (log && results[i].status != ImageStatus::Ok) {
        std::lock_guard lock(mu);
        *log << "palynseg: " << status_name(results[i].status) << ": " << results[i].file << ": " << results[i].message
             << '\n';
      } else if (log && !results[i].message.empty()) {
        std::lock_guard lock(mu);
        *log << "palynseg: warning: " << results[i].file << ": " << results[i].message << '\n';
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(files.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  BatchSummary s;
  for (auto& r : results) {
    switch (r.status) {
      case ImageStatus::Ok:
        ++s.images_processed;
        s.grains_found += r.grains;
        break;
      case ImageStatus::Error: ++s.errors; break;
      case ImageStatus::Skipped: ++s.skipped; break;
    }
    s.images.push_back(std::move(r));
  }
  write_file_atomic(output_dir / "summary.json", dump(summary_json(s)));
  return s;
}

void write_phantom(const PhantomSpec& spec, const fs::path& output_dir) {
  const Phantom ph = generate(spec);
  ensure_directory(output_dir);
  const fs::path mask_dir = output_dir / (spec.name + ".truth");
  ensure_directory(mask_dir);
  write_png(output_dir / (spec.name + ".png"), ph.image);
  for (std::size_t i = 0; i < ph.truth.grains.size(); ++i) {
    const std::string base = "grain" + std::to_string(i + 1);
    write_png(mask_dir / (base + ".grainmask.png"), mask_to_raster(ph.truth.grains[i].grain_mask));
    write_png(mask_dir / (base + ".innermask.png"), mask_to_raster(ph.truth.grains[i].inner_mask));
    write_png(mask_dir / (base + ".exinemask.png"), mask_to_raster(ph.truth.grains[i].exine_mask));
  }
  write_file_atomic(output_dir / (spec.name + ".truth.json"), dump(truth_json(spec, ph.truth)));
}

json score_directories(const fs::path& results_dir, const fs::path& truth_dir, double iou_threshold) {
  std::vector<fs::path> truths;
  for (const auto& entry : fs::directory_iterator(truth_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".truth.json")) truths.push_back(entry.path());
  }
  std::sort(truths.begin(), truths.end());

  json images = json::array();
  std::size_t n_truth = 0;
  std::size_t matched = 0;
  std::size_t false_positives = 0;
  for (const fs::path& tp : truths) {
    const std::string name = tp.filename().string();
    const std::string stem = name.substr(0, name.size() - std::string(".truth.json").size());
    const PhantomTruth truth = load_truth(tp);
    std::vector<GrainRecord> records;
    const fs::path rp = results_dir / (stem + ".report.json");
    if (fs::exists(rp)) {
      std::ifstream in(rp);
      records = load_report_records(json::parse(in), results_dir);
    }
    const ScoreReport sc = score(records, truth, iou_threshold);
    n_truth += truth.grains.size();
    matched += sc.matched;
    false_positives += sc.false_positives;
    json j = score_json(sc);
    j["image"] = stem;
    j["report_found"] = fs::exists(rp);
    images.push_back(std::move(j));
  }
  return {{"images", std::move(images)},
          {"truth_grains", n_truth},
          {"matched", matched},
          {"false_positives", false_positives},
          {"recall", n_truth == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(n_truth)}};
}

}  // namespace palynseg
