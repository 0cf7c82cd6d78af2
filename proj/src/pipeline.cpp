#include "tandepth/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "tandepth/error.hpp"
#include "tandepth/geodesy.hpp"
#include "tandepth/io.hpp"
#include "tandepth/log.hpp"
#include "tandepth/pfm.hpp"
#include "tandepth/scaling.hpp"

namespace tandepth {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_path(const std::string& path, const char* what) {
  if (path.empty()) raise(Errc::ConfigError, std::string(what) + " not set");
  if (!fs::exists(path)) raise(Errc::ConfigError, std::string(what) + " not found: " + path);
}

bool known_method(const std::string& m) {
  return m == "tandepth" || m == "camheight" || m == "fixed" || m == "median" ||
         m == "reference";
}

GdemCloud load_gdem_input(const PipelineConfig& config) {
  GdemCloud cloud;
  std::string ext = fs::path(config.gdem_path).extension().string();
  if (ext == ".tdgd") {
    cloud = load_gdem(config.gdem_path);
  } else if (ext == ".xyz") {
    auto rows = read_xyz(config.gdem_path);
    if (config.gdem_geodetic) {
      double mean_lat = 0, mean_lon = 0;
      for (const auto& r : rows) {
        mean_lon += r.x();
        mean_lat += r.y();
      }
      mean_lon /= std::max<size_t>(rows.size(), 1);
      mean_lat /= std::max<size_t>(rows.size(), 1);
      UtmZone zone = utm_zone_for(mean_lat, mean_lon);
      if (config.utm_zone) zone = UtmZone{std::abs(*config.utm_zone), *config.utm_zone < 0};
      cloud.points.reserve(rows.size());
      for (const auto& r : rows) {
        auto [e, n] = geodetic_to_utm({r.y(), r.x(), r.z()}, zone);
        cloud.points.emplace_back(e, n, r.z());
      }
    } else {
      cloud.points = std::move(rows);
    }
  } else {
    raise(Errc::ConfigError, "unrecognized GDEM format: " + config.gdem_path);
  }
  if (config.densify_input && cloud.source_tag == GdemCloud::Source::Raw) {
    cloud = densify(triangulate_2_5d(cloud), config.density, config.seed);
  }
  return cloud;
}

nlohmann::json timing_json(const FrameTiming& t) {
  return {{"projection", t.projection_ms}, {"occlusion", t.occlusion_ms},
          {"csf", t.csf_ms},               {"least_squares", t.least_squares_ms},
          {"apply", t.apply_ms},           {"total", t.total_ms}};
}

nlohmann::json metrics_json(const MetricsReport& m) {
  return {
      {"abs_rel", m.abs_rel},
      {"sq_rel", m.sq_rel},
      {"rmse", m.rmse},
      {"log_rmse", m.log_rmse},
      {"delta", {m.delta[0], m.delta[1], m.delta[2]}},
      {"delta_bar", {m.delta_bar[0], m.delta_bar[1], m.delta_bar[2]}},
      {"n_pixels", m.n_pixels},
      {"n_frames", m.n_frames},
      {"n_failed_frames", m.n_failed_frames},
      {"n_failed_pixels", m.n_failed_pixels},
  };
}

struct FrameWork {
  FrameResult result;
  std::optional<MetricsReport> metrics;
};

void process_frame(const PipelineConfig& config, const GdemCloud& gdem, const Intrinsics& k,
                   const PoseRecord& rec, FrameWork& out) {
  out.result.frame_id = rec.frame_id;
  auto frame_start = Clock::now();
  try {
    std::string disp_path =
        (fs::path(config.disparity_dir) / (rec.frame_id + ".pfm")).string();
    require_path(disp_path, "disparity");
    DisparityMap disp = read_pfm(disp_path);
    if (disp.rows() != k.height || disp.cols() != k.width)
      raise(Errc::ConfigError, rec.frame_id + ": disparity is " + std::to_string(disp.cols()) +
                                   "x" + std::to_string(disp.rows()) + ", intrinsics expect " +
                                   std::to_string(k.width) + "x" + std::to_string(k.height));

    PoseRecord filled = rec;
    if (!filled.agl_m) {
      double ground_z = altitude_sync(
          0.0, Eigen::Vector2d(rec.position.x(), rec.position.y()), gdem.points);
      filled.agl_m = rec.position.z() - ground_z;
    }
    Pose pose = to_pose(filled);

    DepthMap ref;
    bool have_ref = false;
    if (!config.ref_dir.empty()) {
      std::string ref_path = (fs::path(config.ref_dir) / (rec.frame_id + ".pfm")).string();
      if (fs::exists(ref_path)) {
        ref = read_pfm(ref_path);
        have_ref = true;
      } else if (config.method == "median" || config.method == "reference") {
        raise(Errc::ConfigError, "reference depth not found: " + ref_path);
      } else {
        log(LogLevel::Warn, rec.frame_id + ": no reference depth, metrics skipped");
      }
    }

    ScaleParams params{config.rough.s_bar, config.rough.t_bar};
    DepthMap depth;
    size_t n_anchors = 0;
    double residual = 0;
    GroundMask ground;
    bool have_ground = false;
    SparseGroundMap anchors;
    bool have_anchors = false;
    auto& timing = out.result.timing;

    if (config.method == "tandepth" || config.method == "camheight") {
      auto t0 = Clock::now();
      ground = segment_ground(disp, pose, k, config.rough, config.profile,
                              config.csf_input_size);
      timing.csf_ms = ms_since(t0);
      have_ground = true;
    }

    if (config.method == "tandepth") {
      auto t0 = Clock::now();
      SparseGroundMap sparse = project_gdem(gdem, pose, k);
      timing.projection_ms = ms_since(t0);
      t0 = Clock::now();
      sparse = reject_occluded(sparse);
      timing.occlusion_ms = ms_since(t0);
      anchors = apply_masks(sparse, ground, config.range);
      have_anchors = true;
      t0 = Clock::now();
      ScaleOutcome outcome = tandepth_scale(disp, anchors, config.n_min_anchors);
      timing.least_squares_ms = ms_since(t0);
      params = outcome.params;
      depth = std::move(outcome.depth);
      n_anchors = outcome.n_anchors;
      residual = outcome.residual_rms;
    } else if (config.method == "camheight") {
      DepthMap rough = rough_scale(disp, config.rough);
      GroundMask normals = normals_ground_mask(rough, k, pose);
      for (size_t i = 0; i < ground.size(); ++i) ground[i] = ground[i] && normals[i];
      auto t0 = Clock::now();
      if (config.single_factor) {
        auto [sf, scaled] = camera_height_single_factor(rough, pose, k, ground);
        timing.least_squares_ms = ms_since(t0);
        params = {config.rough.s_bar / sf, config.rough.t_bar / sf};
        depth = std::move(scaled);
      } else {
        ScaleOutcome outcome = camera_height_scale(disp, pose, k, ground, config.n_min_anchors);
        timing.least_squares_ms = ms_since(t0);
        params = outcome.params;
        depth = std::move(outcome.depth);
        n_anchors = outcome.n_anchors;
        residual = outcome.residual_rms;
      }
    } else if (config.method == "fixed") {
      auto t0 = Clock::now();
      depth = rough_scale(disp, config.rough);
      timing.apply_ms = ms_since(t0);
    } else if (config.method == "median") {
      DepthMap rough = rough_scale(disp, config.rough);
      auto t0 = Clock::now();
      double factor = median_scale(rough, ref);
      timing.least_squares_ms = ms_since(t0);
      params = {config.rough.s_bar / factor, config.rough.t_bar / factor};
    } else if (config.method == "reference") {
      auto t0 = Clock::now();
      ScaleOutcome outcome = reference_scale(disp, ref, config.range, config.n_min_anchors);
      timing.least_squares_ms = ms_since(t0);
      params = outcome.params;
      depth = std::move(outcome.depth);
      n_anchors = outcome.n_anchors;
      residual = outcome.residual_rms;
    }

    if (depth.size() == 0) {
      auto t0 = Clock::now();
      depth = apply_scale(disp, params);
      timing.apply_ms = ms_since(t0);
    }
    timing.total_ms = ms_since(frame_start);

    fs::path out_dir(config.output_dir);
    write_pfm(depth, (out_dir / (rec.frame_id + "_depth.pfm")).string());
    if (config.write_masks && have_ground)
      write_mask_png(ground, (out_dir / (rec.frame_id + "_ground.png")).string());
    if (config.write_anchors && have_anchors)
      write_anchor_csv(anchors, (out_dir / (rec.frame_id + "_anchors.csv")).string());

    out.result.ok = true;
    out.result.s = params.s;
    out.result.t = params.t;
    out.result.n_anchors = n_anchors;
    out.result.residual_rms = residual;

    if (have_ref) {
      try {
        out.metrics = compute_metrics(depth, ref, config.range);
      } catch (const Error& e) {
        log(LogLevel::Warn, rec.frame_id + ": " + e.what());
      }
    }
  } catch (const std::exception& e) {
    out.result.ok = false;
    out.result.error = e.what();
    out.result.timing.total_ms = ms_since(frame_start);
    log(LogLevel::Warn, rec.frame_id + ": " + e.what());
  }

  nlohmann::json sidecar;
  sidecar["frame_id"] = out.result.frame_id;
  sidecar["method"] = config.method;
  sidecar["status"] = out.result.ok ? "ok" : out.result.error;
  sidecar["s"] = out.result.s;
  sidecar["t"] = out.result.t;
  sidecar["n_anchors"] = out.result.n_anchors;
  sidecar["residual_rms"] = out.result.residual_rms;
  sidecar["timing_ms"] = timing_json(out.result.timing);
  std::ofstream side((fs::path(config.output_dir) / (rec.frame_id + ".json")).string());
  side << sidecar.dump(2) << "\n";
}

}  // namespace

SessionReport run_pipeline(const PipelineConfig& config) {
  require_path(config.gdem_path, "GDEM");
  require_path(config.intrinsics_path, "intrinsics");
  require_path(config.poses_path, "poses");
  require_path(config.disparity_dir, "disparity directory");
  if (!known_method(config.method)) raise(Errc::ConfigError, "unknown method " + config.method);
  if (config.method == "median" || config.method == "reference" || !config.ref_dir.empty())
    require_path(config.ref_dir, "reference directory");
  if (!(config.density > 0)) raise(Errc::ConfigError, "density must be positive");
  if (!(config.range.range_min > 0) || !(config.range.range_max > config.range.range_min))
    raise(Errc::ConfigError, "invalid range mask");
  if (config.rough.s_bar <= 0) raise(Errc::ConfigError, "s_bar must be positive");
  if (config.csf_input_size &&
      (config.csf_input_size->first < 2 || config.csf_input_size->second < 2))
    raise(Errc::ConfigError, "csf input size too small");
  if (config.output_dir.empty()) raise(Errc::ConfigError, "output directory not set");
  fs::create_directories(config.output_dir);

  GdemCloud gdem = load_gdem_input(config);
  Intrinsics k = read_intrinsics(config.intrinsics_path);
  std::vector<PoseRecord> poses = read_poses(config.poses_path);
  log(LogLevel::Info, "pipeline: " + std::to_string(poses.size()) + " frames, " +
                          std::to_string(gdem.points.size()) + " GDEM points, method " +
                          config.method);

  std::vector<FrameWork> work(poses.size());
  int jobs = std::max(1, config.jobs);
  if (jobs == 1 || poses.size() <= 1) {
    for (size_t i = 0; i < poses.size(); ++i) process_frame(config, gdem, k, poses[i], work[i]);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < poses.size(); i = next.fetch_add(1))
        process_frame(config, gdem, k, poses[i], work[i]);
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min<int>(jobs, static_cast<int>(poses.size())); ++j)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SessionReport report;
  std::vector<MetricsReport> frame_metrics;
  for (auto& w : work) {
    report.frames.push_back(w.result);
    if (w.result.ok)
      ++report.n_ok;
    else
      ++report.n_failed;
    if (w.metrics) frame_metrics.push_back(*w.metrics);
  }
  report.stage_stats = timing_report(report.frames);
  if (!config.ref_dir.empty() && !frame_metrics.empty()) {
    report.metrics_pooled = aggregate(frame_metrics);
    report.metrics_frame_mean = aggregate_frame_mean(frame_metrics);
    size_t missing = poses.size() - frame_metrics.size();
    report.metrics_pooled->n_failed_frames = missing;
    report.metrics_frame_mean->n_failed_frames = missing;
  }
  log(LogLevel::Info, "pipeline: " + std::to_string(report.n_ok) + " ok, " +
                          std::to_string(report.n_failed) + " failed");
  return report;
}

std::map<std::string, StageStats> timing_report(const std::vector<FrameResult>& frames) {
  auto stats_of = [](std::vector<double> v) {
    StageStats s;
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    double sum = 0;
    for (double x : v) sum += x;
    s.mean_ms = sum / v.size();
    size_t n = v.size();
    s.median_ms = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    size_t idx = static_cast<size_t>(std::ceil(0.95 * n));
    s.p95_ms = v[std::min(idx == 0 ? 0 : idx - 1, n - 1)];
    return s;
  };
  std::vector<double> proj, occ, csf, lsq, apply, total;
  for (const auto& f : frames) {
    if (!f.ok) continue;
    proj.push_back(f.timing.projection_ms);
    occ.push_back(f.timing.occlusion_ms);
    csf.push_back(f.timing.csf_ms);
    lsq.push_back(f.timing.least_squares_ms);
    apply.push_back(f.timing.apply_ms);
    total.push_back(f.timing.total_ms);
  }
  std::map<std::string, StageStats> out;
  if (proj.empty()) return out;
  out["projection"] = stats_of(proj);
  out["occlusion"] = stats_of(occ);
  out["csf"] = stats_of(csf);
  out["least_squares"] = stats_of(lsq);
  out["apply"] = stats_of(apply);
  out["total"] = stats_of(total);
  return out;
}

void write_session_report(const SessionReport& report, const PipelineConfig& config,
                          const std::string& path) {
  nlohmann::json j;
  j["schema"] = 1;
  j["method"] = config.method;
  j["range_m"] = {config.range.range_min, config.range.range_max};
  j["seed"] = config.seed;
  j["n_frames"] = report.frames.size();
  j["n_ok"] = report.n_ok;
  j["n_failed"] = report.n_failed;
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : report.frames) {
    nlohmann::json fj;
    fj["frame_id"] = f.frame_id;
    fj["ok"] = f.ok;
    if (!f.ok) fj["error"] = f.error;
    fj["s"] = f.s;
    fj["t"] = f.t;
    fj["n_anchors"] = f.n_anchors;
    fj["residual_rms"] = f.residual_rms;
    fj["timing_ms"] = timing_json(f.timing);
    frames.push_back(std::move(fj));
  }
  j["frames"] = std::move(frames);
  nlohmann::json stages;
  for (const auto& [name, s] : report.stage_stats)
    stages[name] = {{"mean_ms", s.mean_ms}, {"median_ms", s.median_ms}, {"p95_ms", s.p95_ms}};
  j["stage_stats"] = std::move(stages);
  if (report.metrics_pooled && report.metrics_frame_mean) {
    j["metrics"] = {{"pixel_pooled", metrics_json(*report.metrics_pooled)},
                    {"frame_mean", metrics_json(*report.metrics_frame_mean)}};
  }
  std::ofstream out(path);
  if (!out) raise(Errc::FormatError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tandepth
