#include "palynseg/report.hpp"

#include <cmath>
#include <ctime>
#include <fstream>

#include "palynseg/imageio.hpp"

namespace palynseg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view version() { return PALYNSEG_VERSION; }

GrainFiles grain_files(const std::string& stem, int id) {
  const std::string base = stem + ".grain" + std::to_string(id);
  return {base + ".png", base + ".grainmask.png", base + ".exinemask.png", base + ".innermask.png"};
}

namespace {

json points_json(const Contour& c) {
  json arr = json::array();
  for (const auto& p : c.points) arr.push_back({p.x, p.y});
  return arr;
}

Contour contour_from_json(const json& arr) {
  Contour c;
  for (const auto& p : arr) c.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return c;
}

json bbox_json(const BBox& b) { return {b.x0, b.y0, b.x1, b.y1}; }

BBox bbox_from_json(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<int>()}; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json stats_json(const RegionStats& s) {
  return {{"area", s.area},
          {"perimeter", s.perimeter},
          {"equiv_radius", s.equiv_radius},
          {"circularity", s.circularity()},
          {"mean_intensity", s.mean_intensity},
          {"intensity_sd", s.intensity_sd},
          {"centroid", {s.centroid.x, s.centroid.y}},
          {"bbox", bbox_json(s.bbox)},
          {"touches_border", s.touches_border},
          {"elongation", s.elongation}};
}

std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

BinaryMask read_mask(const fs::path& path) {
  const Raster r = read_image(path);
  return raster_to_mask(r);
}

}  // namespace

json config_json(const PipelineConfig& cfg) {
  json j = json::object();
  for (const auto& v : config_values(cfg)) {
    std::visit([&](const auto& x) { j[v.section][v.key] = x; }, v.value);
  }
  return j;
}

json report_json(const SegmentationResult& result, const ImageInfo& info, const PipelineConfig& cfg) {
  json j;
  j["tool"] = "palynseg";
  j["version"] = std::string(version());
  j["image"] = {{"file", info.file}, {"width", info.width}, {"height", info.height}, {"channels", info.channels}};
  j["config"] = config_json(cfg);
  j["warnings"] = result.warnings;

  json grains = json::array();
  for (const GrainRecord& g : result.grains) {
    const GrainFiles files = grain_files(info.stem, g.id);
    json rec;
    rec["id"] = g.id;
    rec["bbox"] = bbox_json(g.bbox);
    rec["offset"] = {g.offset_x, g.offset_y};
    rec["sub_size"] = {g.sub_width(), g.sub_height()};
    rec["stats"] = stats_json(g.stats);
    rec["grain_contour"] = points_json(g.grain_contour);
    rec["inner_contour"] = g.inner_contour ? points_json(*g.inner_contour) : json(nullptr);
    rec["exine_thickness_est"] = g.exine_thickness_est ? json(*g.exine_thickness_est) : json(nullptr);
    rec["gap_erosion_index"] = g.gap_erosion_index ? json(*g.gap_erosion_index) : json(nullptr);
    rec["edge_ratios"] = g.edge_ratios;
    rec["areas"] = {{"grain", g.grain_mask.count()}, {"exine", g.exine_mask.count()}, {"inner", g.inner_mask.count()}};
    rec["files"] = {{"image", files.image},
                    {"grain_mask", files.grain_mask},
                    {"exine_mask", files.exine_mask},
                    {"inner_mask", files.inner_mask}};
    const GrainDiagnostics& d = g.diagnostics;
    rec["diagnostics"] = {{"border_touch", d.border_touch},
                          {"no_exine_boundary", d.no_exine_boundary},
                          {"cluster_suspect", d.cluster_suspect},
                          {"snake_failed", d.snake_failed},
                          {"snake_max_displacement", d.snake_max_displacement},
                          {"inner_snake_max_displacement", d.inner_snake_max_displacement}};
    grains.push_back(std::move(rec));
  }
  j["grains"] = std::move(grains);

  json counts = {{"min_area", 0}, {"circularity", 0}, {"intensity_sd", 0}, {"border_touch", 0}};
  json rejected = json::array();
  for (const RejectedCandidate& r : result.rejected) {
    const std::string reason(to_string(r.reason));
    counts[reason] = counts[reason].get<int>() + 1;
    if (r.reason == RejectionReason::MinArea) continue;
    rejected.push_back({{"bbox", bbox_json(r.bbox)},
                        {"area", r.area},
                        {"circularity", number_or_null(r.circularity)},
                        {"intensity_sd", r.intensity_sd},
                        {"reason", reason}});
  }
  j["rejected"] = std::move(rejected);
  j["rejection_counts"] = std::move(counts);
  if (cfg.output.timestamp) j["timestamp"] = utc_timestamp();
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<GrainRecord> load_report_records(const json& report, const fs::path& dir) {
  std::vector<GrainRecord> out;
  for (const auto& g : report.at("grains")) {
    GrainRecord rec;
    rec.id = g.at("id").get<int>();
    rec.bbox = bbox_from_json(g.at("bbox"));
    rec.offset_x = g.at("offset").at(0).get<int>();
    rec.offset_y = g.at("offset").at(1).get<int>();
    rec.grain_contour = contour_from_json(g.at("grain_contour"));
    if (!g.at("inner_contour").is_null()) rec.inner_contour = contour_from_json(g.at("inner_contour"));
    if (!g.at("exine_thickness_est").is_null()) rec.exine_thickness_est = g.at("exine_thickness_est").get<double>();
    if (!g.at("gap_erosion_index").is_null()) rec.gap_erosion_index = g.at("gap_erosion_index").get<std::size_t>();
    rec.edge_ratios = g.at("edge_ratios").get<std::vector<double>>();
    const json& files = g.at("files");
    rec.grain_mask = read_mask(dir / files.at("grain_mask").get<std::string>());
    rec.exine_mask = read_mask(dir / files.at("exine_mask").get<std::string>());
    rec.inner_mask = read_mask(dir / files.at("inner_mask").get<std::string>());
    const json& d = g.at("diagnostics");
    rec.diagnostics.border_touch = d.at("border_touch").get<bool>();
    rec.diagnostics.no_exine_boundary = d.at("no_exine_boundary").get<bool>();
    rec.diagnostics.cluster_suspect = d.at("cluster_suspect").get<bool>();
    rec.diagnostics.snake_failed = d.at("snake_failed").get<bool>();
    rec.diagnostics.snake_max_displacement = d.at("snake_max_displacement").get<double>();
    rec.diagnostics.inner_snake_max_displacement = d.at("inner_snake_max_displacement").get<double>();
    out.push_back(std::move(rec));
  }
  return out;
}

json truth_json(const PhantomSpec& spec, const PhantomTruth& truth) {
  json grains = json::array();
  for (std::size_t i = 0; i < truth.grains.size(); ++i) {
    const GrainTruth& g = truth.grains[i];
    const std::string base = "grain" + std::to_string(i + 1);
    grains.push_back({{"center", {g.center.x, g.center.y}},
                      {"inner_radius", g.inner_radius},
                      {"outer_radius", g.outer_radius},
                      {"exine_thickness", g.outer_radius - g.inner_radius},
                      {"interior_style", std::string(to_string(spec.grains[i].interior_style))},
                      {"files",
                       {{"grain_mask", base + ".grainmask.png"},
                        {"inner_mask", base + ".innermask.png"},
                        {"exine_mask", base + ".exinemask.png"}}}});
  }
  return {{"name", spec.name},
          {"width", truth.width},
          {"height", truth.height},
          {"rng_seed", spec.rng_seed},
          {"debris", spec.debris.size()},
          {"smudges", spec.smudges.size()},
          {"grains", std::move(grains)}};
}

PhantomTruth load_truth(const fs::path& truth_json_path) {
  std::ifstream in(truth_json_path);
  if (!in) throw Error("cannot open " + truth_json_path.string());
  const json j = json::parse(in);
  std::string stem = truth_json_path.filename().string();
  stem = stem.substr(0, stem.size() - std::string(".truth.json").size());
  const fs::path mask_dir = truth_json_path.parent_path() / (stem + ".truth");

  PhantomTruth t;
  t.width = j.at("width").get<int>();
  t.height = j.at("height").get<int>();
  for (const auto& g : j.at("grains")) {
    GrainTruth gt;
    gt.center = {g.at("center").at(0).get<double>(), g.at("center").at(1).get<double>()};
    gt.inner_radius = g.at("inner_radius").get<double>();
    gt.outer_radius = g.at("outer_radius").get<double>();
    const json& files = g.at("files");
    gt.grain_mask = read_mask(mask_dir / files.at("grain_mask").get<std::string>());
    gt.inner_mask = read_mask(mask_dir / files.at("inner_mask").get<std::string>());
    gt.exine_mask = read_mask(mask_dir / files.at("exine_mask").get<std::string>());
    t.grains.push_back(std::move(gt));
  }
  return t;
}

json score_json(const ScoreReport& score) {
  json grains = json::array();
  for (const GrainScore& g : score.grains) {
    grains.push_back({{"truth_index", g.truth_index},
                      {"record_index", g.record_index},
                      {"matched", g.record_index >= 0},
                      {"grain_iou", g.grain_iou},
                      {"grain_rms_radial", number_or_null(g.grain_rms_radial)},
                      {"inner_rms_radial", number_or_null(g.inner_rms_radial)},
                      {"exine_thickness_error", number_or_null(g.exine_thickness_error)},
                      {"exine_iou", g.exine_iou}});
  }
  return {{"matched", score.matched},
          {"false_positives", score.false_positives},
          {"recall", score.recall},
          {"grains", std::move(grains)}};
}

}  // namespace palynseg
