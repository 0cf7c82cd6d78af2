#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tandepth/projection.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

struct MetricsReport {
  double abs_rel = 0;
  double sq_rel = 0;
  double rmse = 0;
  double log_rmse = 0;
  double delta[3] = {0, 0, 0};      // max-ratio < 1.25^T
  double delta_bar[3] = {0, 0, 0};  // max-ratio < 1.025^T
  size_t n_pixels = 0;
  size_t n_frames = 0;
  size_t n_failed_frames = 0;
  size_t n_failed_pixels = 0;  // ref-valid pixels with no prediction
};

// Per-frame metrics over reference pixels inside [range_min, range_max].
// Prediction-invalid pixels are excluded from the means and counted as
// failed. Throws EmptyEvaluation when no pixel survives.
MetricsReport compute_metrics(const DepthMap& pred, const DepthMap& ref, const RangeMask& range);

// Pixel-pooled aggregation: equals the metrics computed over the
// concatenation of all frames' pixels.
MetricsReport aggregate(const std::vector<MetricsReport>& reports);

// Unweighted mean of per-frame metrics, reported alongside the pooled form.
MetricsReport aggregate_frame_mean(const std::vector<MetricsReport>& reports);

// Per-pixel |D - D*|/D* raster; 0 where either side is invalid.
Raster<float> error_map(const DepthMap& pred, const DepthMap& ref);

std::string report_to_json(const MetricsReport& pooled, const MetricsReport& frame_mean,
                           const RangeMask& range);
std::string report_to_markdown(const MetricsReport& report);  // AbsRel SqRel RMSE LogRMSE ...

void emit_report(const MetricsReport& pooled, const MetricsReport& frame_mean,
                 const RangeMask& range, const std::string& json_path,
                 const std::string& markdown_path = "");

}  // namespace tandepth
