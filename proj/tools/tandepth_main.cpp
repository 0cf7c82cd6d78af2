#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tandepth/error.hpp"
#include "tandepth/eval.hpp"
#include "tandepth/gdem.hpp"
#include "tandepth/geodesy.hpp"
#include "tandepth/groundseg.hpp"
#include "tandepth/io.hpp"
#include "tandepth/log.hpp"
#include "tandepth/pfm.hpp"
#include "tandepth/pipeline.hpp"
#include "tandepth/scaling.hpp"
#include "tandepth/synth.hpp"
#include "tandepth/version.hpp"

namespace fs = std::filesystem;
using namespace tandepth;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int parse_zone(const std::string& text) {
  if (text.empty()) return 0;
  std::string digits = text;
  int sign = 1;
  char tail = digits.back();
  if (tail == 'S' || tail == 's') {
    sign = -1;
    digits.pop_back();
  } else if (tail == 'N' || tail == 'n') {
    digits.pop_back();
  }
  int number = std::stoi(digits);
  if (number < 1 || number > 60) raise(Errc::ConfigError, "UTM zone out of range: " + text);
  return sign * number;
}

RangeMask parse_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) raise(Errc::ConfigError, "range must be min:max, got " + text);
  RangeMask range;
  range.range_min = std::stod(text.substr(0, colon));
  range.range_max = std::stod(text.substr(colon + 1));
  if (!(range.range_min > 0) || !(range.range_max > range.range_min))
    raise(Errc::ConfigError, "invalid range " + text);
  return range;
}

std::optional<std::pair<int, int>> parse_csf_size(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto x = text.find('x');
  if (x == std::string::npos)
    raise(Errc::ConfigError, "csf input size must be ROWSxCOLS, got " + text);
  return std::pair{std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

RoughScaleParams read_rough_params(const std::string& path) {
  RoughScaleParams rough;
  if (path.empty()) return rough;
  std::ifstream in(path);
  if (!in) raise(Errc::ConfigError, "cannot open rough params " + path);
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    rough.s_bar = j.at("s_bar").get<double>();
    rough.t_bar = j.at("t_bar").get<double>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::FormatError, path + ": " + std::string(e.what()));
  }
  return rough;
}

CsfProfile parse_profile(const std::string& text) {
  if (text == "default") return CsfProfile::Default;
  if (text == "cluttered") return CsfProfile::Cluttered;
  raise(Errc::ConfigError, "unknown CSF profile " + text);
}

PoseRecord pick_pose(const std::vector<PoseRecord>& records, const std::string& frame_id) {
  if (records.empty()) raise(Errc::ConfigError, "pose file has no records");
  if (frame_id.empty()) return records.front();
  for (const auto& rec : records)
    if (rec.frame_id == frame_id) return rec;
  raise(Errc::ConfigError, "frame " + frame_id + " not in pose file");
}

Pose resolve_pose(PoseRecord rec, const GdemCloud* gdem) {
  if (!rec.agl_m && gdem) {
    double ground_z = altitude_sync(
        0.0, Eigen::Vector2d(rec.position.x(), rec.position.y()), gdem->points);
    rec.agl_m = rec.position.z() - ground_z;
  }
  return to_pose(rec);
}

// ---------------------------------------------------------------- prepare-gdem

struct PrepareArgs {
  std::string input, output, zone_text, shift_text;
  bool geodetic = false, auto_shift = false, no_densify = false;
  double density = 0.05;
  uint64_t seed = 0;
  double sync_height = 0;
  std::string sync_xy_text;
};

void run_prepare(const PrepareArgs& args) {
  auto rows = read_xyz(args.input);
  if (rows.empty()) raise(Errc::ConfigError, args.input + " has no points");

  GdemCloud cloud;
  cloud.points.reserve(rows.size());
  if (args.geodetic) {
    double mean_lat = 0, mean_lon = 0;
    for (const auto& r : rows) {
      mean_lon += r.x();
      mean_lat += r.y();
    }
    mean_lon /= rows.size();
    mean_lat /= rows.size();
    UtmZone zone = utm_zone_for(mean_lat, mean_lon);
    int forced = parse_zone(args.zone_text);
    if (forced != 0) zone = UtmZone{std::abs(forced), forced < 0};
    log(LogLevel::Info, "projecting to UTM zone " + std::to_string(zone.number) +
                            (zone.south ? "S" : "N"));
    for (const auto& r : rows) {
      auto [e, n] = geodetic_to_utm({r.y(), r.x(), r.z()}, zone);
      cloud.points.emplace_back(e, n, r.z());
    }
  } else {
    cloud.points = rows;
  }

  GlobalShift shift;
  if (!args.shift_text.empty()) {
    if (std::sscanf(args.shift_text.c_str(), "%lf,%lf,%lf", &shift.shift_x, &shift.shift_y,
                    &shift.shift_z) != 3)
      raise(Errc::ConfigError, "shift must be x,y,z");
  } else if (args.auto_shift) {
    double min_x = cloud.points[0].x(), min_y = cloud.points[0].y();
    for (const auto& p : cloud.points) {
      min_x = std::min(min_x, p.x());
      min_y = std::min(min_y, p.y());
    }
    shift.shift_x = std::floor(min_x / 1000.0) * 1000.0;
    shift.shift_y = std::floor(min_y / 1000.0) * 1000.0;
  }
  if (shift.shift_x != 0 || shift.shift_y != 0 || shift.shift_z != 0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "global shift (%.3f, %.3f, %.3f)", shift.shift_x,
                  shift.shift_y, shift.shift_z);
    log(LogLevel::Info, buf);
    for (auto& p : cloud.points) p = apply_global_shift(p.x(), p.y(), p.z(), shift);
  }

  if (!args.sync_xy_text.empty()) {
    double sx, sy;
    if (std::sscanf(args.sync_xy_text.c_str(), "%lf,%lf", &sx, &sy) != 2)
      raise(Errc::ConfigError, "sync-xy must be x,y");
    double vshift = altitude_sync(args.sync_height, {sx, sy}, cloud.points);
    std::printf("altitude_shift_m: %.6f\n", vshift);
  }

  if (!args.no_densify) {
    auto surface = triangulate_2_5d(cloud);
    cloud = densify(surface, args.density, args.seed);
  }
  save_gdem(cloud, args.output);
  std::printf("wrote %zu points to %s\n", cloud.points.size(), args.output.c_str());
}

// ----------------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir, terrain = "plane";
  double base_z = 0, grade = 0.1, amplitude = 5, wavelength = 50;
  std::vector<std::string> box_specs;
  int frames = 1, width = 1024, height = 512;
  double focal = 512, agl = 50, pitch = 45, step = 5;
  std::string extent_text = "-200:200:-50:400";
  double spacing = 30, density = 0.05, gdem_noise = 0, disp_noise = 0;
  double s0 = 3.0, t0 = 0.2;
  uint64_t seed = 0;
  bool no_densify = false;
};

void run_synth(const SynthArgs& args) {
  AnalyticTerrain terrain;
  terrain.base_z = args.base_z;
  if (args.terrain == "plane") {
    terrain.kind = AnalyticTerrain::Kind::Plane;
  } else if (args.terrain == "slope") {
    terrain.kind = AnalyticTerrain::Kind::LinearSlope;
    terrain.grade = args.grade;
  } else if (args.terrain == "hills") {
    terrain.kind = AnalyticTerrain::Kind::SinusoidalHills;
    terrain.amplitude = args.amplitude;
    terrain.wavelength = args.wavelength;
  } else if (args.terrain == "boxes") {
    terrain.kind = AnalyticTerrain::Kind::PlanePlusBoxes;
    for (const auto& spec : args.box_specs) {
      TerrainBox box;
      if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf,%lf", &box.x_min, &box.x_max, &box.y_min,
                      &box.y_max, &box.height) != 5)
        raise(Errc::ConfigError, "box must be x0,x1,y0,y1,h");
      terrain.boxes.push_back(box);
    }
    if (terrain.boxes.empty()) terrain.boxes.push_back({-20, 20, 60, 100, 10});
  } else {
    raise(Errc::ConfigError, "unknown terrain " + args.terrain);
  }

  Intrinsics k;
  k.fx = k.fy = args.focal;
  k.width = args.width;
  k.height = args.height;
  k.cx = args.width / 2.0;
  k.cy = args.height / 2.0;
  validate_intrinsics(k);

  fs::create_directories(fs::path(args.out_dir) / "ref");
  fs::create_directories(fs::path(args.out_dir) / "disp");
  write_intrinsics(k, (fs::path(args.out_dir) / "intrinsics.json").string());

  double e0, e1, e2, e3;
  if (std::sscanf(args.extent_text.c_str(), "%lf:%lf:%lf:%lf", &e0, &e1, &e2, &e3) != 4)
    raise(Errc::ConfigError, "extent must be x0:x1:y0:y1");
  GdemCloud gdem =
      sample_synthetic_gdem(terrain, {e0, e1, e2, e3}, args.spacing, args.gdem_noise, args.seed);
  if (!args.no_densify) gdem = densify(triangulate_2_5d(gdem), args.density, args.seed);
  save_gdem(gdem, (fs::path(args.out_dir) / "gdem.tdgd").string());

  std::vector<PoseRecord> records;
  for (int i = 0; i < args.frames; ++i) {
    double y = i * args.step;
    Pose pose;
    pose.rotation = pitch_rotation(args.pitch);
    pose.position = {0.0, y, terrain.height(0.0, y) + args.agl};
    pose.pitch_deg = args.pitch;
    pose.agl_m = args.agl;
    validate_pose(pose);

    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04d", i);
    DepthMap ref = render_reference_depth(terrain, pose, k);
    DisparityMap disp =
        make_relative_disparity(ref, args.s0, args.t0, args.disp_noise, args.seed + i);
    write_pfm(ref, (fs::path(args.out_dir) / "ref" / (std::string(name) + ".pfm")).string());
    write_pfm(disp, (fs::path(args.out_dir) / "disp" / (std::string(name) + ".pfm")).string());

    PoseRecord rec;
    rec.frame_id = name;
    rec.position = pose.position;
    rec.rotation = Eigen::Quaterniond(pose.rotation);
    rec.pitch_deg = args.pitch;
    rec.agl_m = args.agl;
    records.push_back(rec);
  }
  write_poses(records, (fs::path(args.out_dir) / "poses.jsonl").string());
  std::printf("wrote %d frame(s) to %s\n", args.frames, args.out_dir.c_str());
}

// -------------------------------------------------------------- segment-ground

struct SegmentArgs {
  std::string disparity, intrinsics, poses, frame, rough_params, profile = "default";
  std::string csf_size_text, output, bits;
  double s_bar = 1.0, t_bar = 0.0;
};

void run_segment(const SegmentArgs& args) {
  DisparityMap disp = read_pfm(args.disparity);
  Intrinsics k = read_intrinsics(args.intrinsics);
  Pose pose = resolve_pose(pick_pose(read_poses(args.poses), args.frame), nullptr);
  RoughScaleParams rough{args.s_bar, args.t_bar};
  if (!args.rough_params.empty()) rough = read_rough_params(args.rough_params);

  GroundMask mask = segment_ground(disp, pose, k, rough, parse_profile(args.profile),
                                   parse_csf_size(args.csf_size_text));
  size_t n_ground = 0;
  for (size_t i = 0; i < mask.size(); ++i) n_ground += mask[i] ? 1 : 0;
  if (!args.output.empty()) write_mask_png(mask, args.output);
  if (!args.bits.empty()) write_mask_bits(mask, args.bits);
  std::printf("ground pixels: %zu / %zu\n", n_ground, mask.size());
}

// ----------------------------------------------------------------------- scale

struct ScaleArgs {
  std::string method = "tandepth";
  std::string disparity, poses, intrinsics, gdem, ref, rough_params, frame;
  std::string range_text = "30:150", profile = "default", csf_size_text;
  std::string output;
  double s_bar = 1.0, t_bar = 0.0;
  bool single_factor = false;
  size_t n_min = 10;
};

void run_scale(const ScaleArgs& args) {
  auto frame_start = Clock::now();
  DisparityMap disp = read_pfm(args.disparity);
  Intrinsics k = read_intrinsics(args.intrinsics);
  RoughScaleParams rough{args.s_bar, args.t_bar};
  if (!args.rough_params.empty()) rough = read_rough_params(args.rough_params);
  RangeMask range = parse_range(args.range_text);

  GdemCloud gdem;
  bool have_gdem = false;
  if (!args.gdem.empty()) {
    gdem = load_gdem(args.gdem);
    have_gdem = true;
  }
  Pose pose = resolve_pose(pick_pose(read_poses(args.poses), args.frame),
                           have_gdem ? &gdem : nullptr);

  DepthMap ref;
  if (!args.ref.empty()) ref = read_pfm(args.ref);

  FrameTiming timing;
  ScaleParams params{rough.s_bar, rough.t_bar};
  DepthMap depth;
  size_t n_anchors = 0;
  double residual = 0;

  if (args.method == "tandepth" || args.method == "camheight") {
    auto t0 = Clock::now();
    GroundMask ground = segment_ground(disp, pose, k, rough, parse_profile(args.profile),
                                       parse_csf_size(args.csf_size_text));
    timing.csf_ms = ms_since(t0);
    if (args.method == "tandepth") {
      if (!have_gdem) raise(Errc::ConfigError, "tandepth scaling needs --gdem");
      t0 = Clock::now();
      SparseGroundMap sparse = project_gdem(gdem, pose, k);
      timing.projection_ms = ms_since(t0);
      t0 = Clock::now();
      sparse = reject_occluded(sparse);
      timing.occlusion_ms = ms_since(t0);
      SparseGroundMap anchors = apply_masks(sparse, ground, range);
      t0 = Clock::now();
      ScaleOutcome outcome = tandepth_scale(disp, anchors, args.n_min);
      timing.least_squares_ms = ms_since(t0);
      params = outcome.params;
      depth = std::move(outcome.depth);
      n_anchors = outcome.n_anchors;
      residual = outcome.residual_rms;
    } else {
      DepthMap rough_depth = rough_scale(disp, rough);
      GroundMask normals = normals_ground_mask(rough_depth, k, pose);
      for (size_t i = 0; i < ground.size(); ++i) ground[i] = ground[i] && normals[i];
      t0 = Clock::now();
      if (args.single_factor) {
        auto [sf, scaled] = camera_height_single_factor(rough_depth, pose, k, ground);
        timing.least_squares_ms = ms_since(t0);
        params = {rough.s_bar / sf, rough.t_bar / sf};
        depth = std::move(scaled);
      } else {
        ScaleOutcome outcome = camera_height_scale(disp, pose, k, ground, args.n_min);
        timing.least_squares_ms = ms_since(t0);
        params = outcome.params;
        depth = std::move(outcome.depth);
        n_anchors = outcome.n_anchors;
        residual = outcome.residual_rms;
      }
    }
  } else if (args.method == "fixed") {
    depth = rough_scale(disp, rough);
  } else if (args.method == "median") {
    if (args.ref.empty()) raise(Errc::ConfigError, "median scaling needs --ref");
    DepthMap rough_depth = rough_scale(disp, rough);
    auto t0 = Clock::now();
    double factor = median_scale(rough_depth, ref);
    timing.least_squares_ms = ms_since(t0);
    params = {rough.s_bar / factor, rough.t_bar / factor};
  } else if (args.method == "reference") {
    if (args.ref.empty()) raise(Errc::ConfigError, "reference scaling needs --ref");
    auto t0 = Clock::now();
    ScaleOutcome outcome = reference_scale(disp, ref, range, args.n_min);
    timing.least_squares_ms = ms_since(t0);
    params = outcome.params;
    depth = std::move(outcome.depth);
    n_anchors = outcome.n_anchors;
    residual = outcome.residual_rms;
  } else {
    raise(Errc::ConfigError, "unknown method " + args.method);
  }

  if (depth.size() == 0) {
    auto t0 = Clock::now();
    depth = apply_scale(disp, params);
    timing.apply_ms = ms_since(t0);
  }
  timing.total_ms = ms_since(frame_start);

  write_pfm(depth, args.output);
  nlohmann::json sidecar;
  sidecar["method"] = args.method;
  sidecar["s"] = params.s;
  sidecar["t"] = params.t;
  sidecar["n_anchors"] = n_anchors;
  sidecar["residual_rms"] = residual;
  sidecar["timing_ms"] = {{"projection", timing.projection_ms},
                          {"occlusion", timing.occlusion_ms},
                          {"csf", timing.csf_ms},
                          {"least_squares", timing.least_squares_ms},
                          {"apply", timing.apply_ms},
                          {"total", timing.total_ms}};
  std::string sidecar_path = fs::path(args.output).replace_extension(".json").string();
  std::ofstream side(sidecar_path);
  side << sidecar.dump(2) << "\n";
  std::printf("s=%.9g t=%.9g anchors=%zu residual=%.6g\n", params.s, params.t, n_anchors,
              residual);
}

// ------------------------------------------------------------------------ eval

struct EvalArgs {
  std::string pred_dir, ref_dir, range_text = "30:150";
  std::string report, markdown, plots;
};

void run_eval(const EvalArgs& args) {
  RangeMask range = parse_range(args.range_text);
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(args.ref_dir))
    if (entry.path().extension() == ".pfm") ids.push_back(entry.path().stem().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) raise(Errc::EmptyEvaluation, "no reference PFMs in " + args.ref_dir);

  if (!args.plots.empty()) fs::create_directories(args.plots);
  std::vector<MetricsReport> reports;
  size_t failed = 0;
  for (const auto& id : ids) {
    fs::path pred_path = fs::path(args.pred_dir) / (id + ".pfm");
    if (!fs::exists(pred_path)) pred_path = fs::path(args.pred_dir) / (id + "_depth.pfm");
    if (!fs::exists(pred_path)) {
      log(LogLevel::Warn, id + ": no prediction");
      ++failed;
      continue;
    }
    DepthMap ref = read_pfm((fs::path(args.ref_dir) / (id + ".pfm")).string());
    DepthMap pred = read_pfm(pred_path.string());
    try {
      reports.push_back(compute_metrics(pred, ref, range));
    } catch (const Error& e) {
      log(LogLevel::Warn, id + ": " + e.what());
      ++failed;
      continue;
    }
    if (!args.plots.empty())
      write_pfm(error_map(pred, ref), (fs::path(args.plots) / (id + "_absrel.pfm")).string());
  }
  if (reports.empty()) raise(Errc::EmptyEvaluation, "no frame produced metrics");

  MetricsReport pooled = aggregate(reports);
  MetricsReport frame_mean = aggregate_frame_mean(reports);
  pooled.n_failed_frames = failed;
  frame_mean.n_failed_frames = failed;
  if (!args.report.empty()) emit_report(pooled, frame_mean, range, args.report, args.markdown);
  std::printf("%s", report_to_markdown(pooled).c_str());
}

// -------------------------------------------------------------------- pipeline

struct PipelineArgs {
  PipelineConfig config;
  std::string zone_text, range_text = "30:150", profile = "default", csf_size_text;
  bool no_densify = false;
};

void run_pipeline_cmd(PipelineArgs& args) {
  args.config.densify_input = !args.no_densify;
  int zone = parse_zone(args.zone_text);
  if (zone != 0) args.config.utm_zone = zone;
  args.config.range = parse_range(args.range_text);
  args.config.profile = parse_profile(args.profile);
  args.config.csf_input_size = parse_csf_size(args.csf_size_text);

  SessionReport report = run_pipeline(args.config);
  std::string report_path = (fs::path(args.config.output_dir) / "session.json").string();
  write_session_report(report, args.config, report_path);
  std::printf("%zu frame(s): %zu ok, %zu failed; report %s\n", report.frames.size(),
              report.n_ok, report.n_failed, report_path.c_str());
  if (report.metrics_pooled) std::printf("%s", report_to_markdown(*report.metrics_pooled).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TanDepth: metric scale recovery for relative monocular depth maps"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("tandepth ") + kVersion);
  app.set_config("--config", "", "INI/TOML config file; subcommand options under [pipeline] etc.");

  PrepareArgs prep;
  auto* prep_cmd = app.add_subcommand("prepare-gdem", "Convert and densify a GDEM point cloud");
  prep_cmd->add_option("--input", prep.input, "ASCII XYZ input")->required();
  prep_cmd->add_option("--output", prep.output, "TDGD output")->required();
  prep_cmd->add_flag("--geodetic", prep.geodetic, "rows are lon lat alt (WGS84)");
  prep_cmd->add_option("--zone", prep.zone_text, "UTM zone override, e.g. 32N");
  prep_cmd->add_option("--shift", prep.shift_text, "global shift x,y,z to subtract");
  prep_cmd->add_flag("--auto-shift", prep.auto_shift, "derive shift from the cloud minimum");
  prep_cmd->add_flag("--no-densify", prep.no_densify, "keep the raw cloud");
  prep_cmd->add_option("--density", prep.density, "sampling density, points per square meter");
  prep_cmd->add_option("--seed", prep.seed, "sampling seed");
  prep_cmd->add_option("--sync-height", prep.sync_height, "relative altitude reading to sync");
  prep_cmd->add_option("--sync-xy", prep.sync_xy_text, "horizontal position x,y of the reading");
  prep_cmd->callback([&] { run_prepare(prep); });

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic test scene");
  synth_cmd->add_option("--out", synth.out_dir, "scene directory")->required();
  synth_cmd->add_option("--terrain", synth.terrain, "plane|slope|hills|boxes");
  synth_cmd->add_option("--base-z", synth.base_z, "terrain base altitude");
  synth_cmd->add_option("--grade", synth.grade, "slope dz/dy");
  synth_cmd->add_option("--amplitude", synth.amplitude, "hill amplitude, meters");
  synth_cmd->add_option("--wavelength", synth.wavelength, "hill wavelength, meters");
  synth_cmd->add_option("--box", synth.box_specs, "box x0,x1,y0,y1,h (repeatable)");
  synth_cmd->add_option("--frames", synth.frames, "number of frames");
  synth_cmd->add_option("--width", synth.width, "image width");
  synth_cmd->add_option("--height", synth.height, "image height");
  synth_cmd->add_option("--focal", synth.focal, "focal length, pixels");
  synth_cmd->add_option("--agl", synth.agl, "height above ground, meters");
  synth_cmd->add_option("--pitch", synth.pitch, "camera pitch from horizontal, degrees");
  synth_cmd->add_option("--step", synth.step, "per-frame northing step, meters");
  synth_cmd->add_option("--extent", synth.extent_text, "GDEM extent x0:x1:y0:y1");
  synth_cmd->add_option("--spacing", synth.spacing, "GDEM grid spacing, meters");
  synth_cmd->add_option("--density", synth.density, "densification density");
  synth_cmd->add_flag("--no-densify", synth.no_densify, "keep the raw GDEM grid");
  synth_cmd->add_option("--gdem-noise", synth.gdem_noise, "GDEM vertical noise sigma, meters");
  synth_cmd->add_option("--disp-noise", synth.disp_noise, "log-normal disparity noise sigma");
  synth_cmd->add_option("--s0", synth.s0, "synthetic disparity scale");
  synth_cmd->add_option("--t0", synth.t0, "synthetic disparity shift");
  synth_cmd->add_option("--seed", synth.seed, "scene seed");
  synth_cmd->callback([&] { run_synth(synth); });

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment-ground", "CSF ground mask for one frame");
  seg_cmd->add_option("--disparity", seg.disparity, "relative disparity PFM")->required();
  seg_cmd->add_option("--intrinsics", seg.intrinsics, "intrinsics JSON")->required();
  seg_cmd->add_option("--pose", seg.poses, "poses JSONL")->required();
  seg_cmd->add_option("--frame", seg.frame, "frame id (default: first record)");
  seg_cmd->add_option("--rough-params", seg.rough_params, "JSON with s_bar, t_bar");
  seg_cmd->add_option("--s-bar", seg.s_bar, "rough disparity scale");
  seg_cmd->add_option("--t-bar", seg.t_bar, "rough disparity shift");
  seg_cmd->add_option("--profile", seg.profile, "default|cluttered");
  seg_cmd->add_option("--csf-input-size", seg.csf_size_text, "downscale to ROWSxCOLS");
  seg_cmd->add_option("--output", seg.output, "mask PNG path");
  seg_cmd->add_option("--bits", seg.bits, "mask bitset path");
  seg_cmd->callback([&] { run_segment(seg); });

  ScaleArgs scale;
  auto* scale_cmd = app.add_subcommand("scale", "Recover metric scale for one frame");
  scale_cmd->add_option("--method", scale.method, "fixed|median|camheight|tandepth|reference");
  scale_cmd->add_option("--disparity", scale.disparity, "relative disparity PFM")->required();
  scale_cmd->add_option("--pose", scale.poses, "poses JSONL")->required();
  scale_cmd->add_option("--intrinsics", scale.intrinsics, "intrinsics JSON")->required();
  scale_cmd->add_option("--gdem", scale.gdem, "densified GDEM TDGD");
  scale_cmd->add_option("--ref", scale.ref, "reference depth PFM (median/reference)");
  scale_cmd->add_option("--rough-params", scale.rough_params, "JSON with s_bar, t_bar");
  scale_cmd->add_option("--s-bar", scale.s_bar, "rough disparity scale");
  scale_cmd->add_option("--t-bar", scale.t_bar, "rough disparity shift");
  scale_cmd->add_option("--range", scale.range_text, "anchor range min:max, meters");
  scale_cmd->add_option("--frame", scale.frame, "frame id (default: first record)");
  scale_cmd->add_option("--profile", scale.profile, "default|cluttered");
  scale_cmd->add_option("--csf-input-size", scale.csf_size_text, "downscale to ROWSxCOLS");
  scale_cmd->add_flag("--single-factor", scale.single_factor, "camheight single-factor variant");
  scale_cmd->add_option("--n-min", scale.n_min, "minimum anchor count");
  scale_cmd->add_option("--output", scale.output, "metric depth PFM")->required();
  scale_cmd->callback([&] { run_scale(scale); });

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate predicted depth against references");
  eval_cmd->add_option("--pred-dir", eval.pred_dir, "predicted depth directory")->required();
  eval_cmd->add_option("--ref-dir", eval.ref_dir, "reference depth directory")->required();
  eval_cmd->add_option("--range", eval.range_text, "evaluation range min:max, meters");
  eval_cmd->add_option("--report", eval.report, "JSON report path");
  eval_cmd->add_option("--markdown", eval.markdown, "markdown table path");
  eval_cmd->add_option("--plots", eval.plots, "per-frame error map directory");
  eval_cmd->callback([&] { run_eval(eval); });

  PipelineArgs pipe;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Batch scale recovery over a pose file");
  pipe_cmd->add_option("--gdem", pipe.config.gdem_path, "GDEM (.tdgd or .xyz)");
  pipe_cmd->add_flag("--geodetic", pipe.config.gdem_geodetic, "XYZ rows are lon lat alt");
  pipe_cmd->add_option("--zone", pipe.zone_text, "UTM zone override, e.g. 32N");
  pipe_cmd->add_option("--density", pipe.config.density, "densification density");
  pipe_cmd->add_option("--seed", pipe.config.seed, "densification seed");
  pipe_cmd->add_flag("--no-densify", pipe.no_densify, "use the GDEM as loaded");
  pipe_cmd->add_option("--intrinsics", pipe.config.intrinsics_path, "intrinsics JSON");
  pipe_cmd->add_option("--poses", pipe.config.poses_path, "poses JSONL");
  pipe_cmd->add_option("--disparity-dir", pipe.config.disparity_dir, "disparity PFM directory");
  pipe_cmd->add_option("--ref-dir", pipe.config.ref_dir, "reference depth directory");
  pipe_cmd->add_option("--method", pipe.config.method,
                       "fixed|median|camheight|tandepth|reference");
  pipe_cmd->add_option("--s-bar", pipe.config.rough.s_bar, "rough disparity scale");
  pipe_cmd->add_option("--t-bar", pipe.config.rough.t_bar, "rough disparity shift");
  pipe_cmd->add_option("--range", pipe.range_text, "anchor/metric range min:max");
  pipe_cmd->add_option("--profile", pipe.profile, "default|cluttered");
  pipe_cmd->add_option("--csf-input-size", pipe.csf_size_text, "downscale to ROWSxCOLS");
  pipe_cmd->add_flag("--single-factor", pipe.config.single_factor, "camheight variant");
  pipe_cmd->add_option("--n-min", pipe.config.n_min_anchors, "minimum anchor count");
  pipe_cmd->add_option("--output-dir", pipe.config.output_dir, "output directory");
  pipe_cmd->add_option("--jobs", pipe.config.jobs, "worker threads");
  pipe_cmd->add_flag("--write-masks", pipe.config.write_masks, "save ground masks");
  pipe_cmd->add_flag("--write-anchors", pipe.config.write_anchors, "save anchor CSVs");
  pipe_cmd->callback([&] { run_pipeline_cmd(pipe); });

  try {
    app.parse(argc, argv);
    if (app.get_subcommands().empty()) std::cout << app.help();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "[error] %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[error] %s\n", e.what());
    return 1;
  }
  return 0;
}
