#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tandepth/eval.hpp"
#include "tandepth/groundseg.hpp"
#include "tandepth/projection.hpp"

namespace tandepth {

struct PipelineConfig {
  std::string gdem_path;       // .tdgd, or ASCII .xyz
  bool gdem_geodetic = false;  // xyz rows are lon lat alt
  std::optional<int> utm_zone;
  double density = 0.05;  // pts/m^2 when densifying raw input
  uint64_t seed = 0;
  bool densify_input = true;

  std::string intrinsics_path;
  std::string poses_path;
  std::string disparity_dir;  // <frame_id>.pfm per pose record
  std::string ref_dir;        // optional reference depths, same naming

  std::string method = "tandepth";  // tandepth|camheight|fixed|median|reference
  RoughScaleParams rough;
  RangeMask range;
  CsfProfile profile = CsfProfile::Default;
  std::optional<std::pair<int, int>> csf_input_size;  // rows, cols
  bool single_factor = false;                         // camheight variant
  size_t n_min_anchors = 10;

  std::string output_dir;
  int jobs = 1;
  bool write_masks = false;
  bool write_anchors = false;
};

struct FrameTiming {
  double projection_ms = 0;
  double occlusion_ms = 0;
  double csf_ms = 0;
  double least_squares_ms = 0;
  double apply_ms = 0;
  double total_ms = 0;
};

struct FrameResult {
  std::string frame_id;
  bool ok = false;
  std::string error;  // error-code name and message when not ok
  double s = 0, t = 0;
  size_t n_anchors = 0;
  double residual_rms = 0;
  FrameTiming timing;
};

struct StageStats {
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
};

struct SessionReport {
  std::vector<FrameResult> frames;  // input order
  size_t n_ok = 0;
  size_t n_failed = 0;
  std::map<std::string, StageStats> stage_stats;
  std::optional<MetricsReport> metrics_pooled;      // when ref_dir is set
  std::optional<MetricsReport> metrics_frame_mean;
};

// Validates the config (fatal ConfigError), then processes every pose
// record: ground segmentation, GDEM projection, occlusion rejection,
// masking, scale recovery, PFM + JSON sidecar output. Per-frame failures
// are recorded in the report, not thrown. jobs > 1 distributes frames
// across threads.
SessionReport run_pipeline(const PipelineConfig& config);

// mean/median/p95 per stage over successful frames.
std::map<std::string, StageStats> timing_report(const std::vector<FrameResult>& frames);

void write_session_report(const SessionReport& report, const PipelineConfig& config,
                          const std::string& path);

}  // namespace tandepth
