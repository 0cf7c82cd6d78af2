#include "tandepth/eval.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tandepth/error.hpp"

namespace tandepth {

MetricsReport compute_metrics(const DepthMap& pred, const DepthMap& ref, const RangeMask& range) {
  if (!pred.same_shape(ref))
    raise(Errc::ConfigError, "prediction and reference dimensions differ");
  if (!(range.range_min > 0) || range.range_max <= range.range_min)
    raise(Errc::ConfigError, "invalid depth range");

  MetricsReport m;
  m.n_frames = 1;
  double sum_abs = 0, sum_sq = 0, sum_se = 0, sum_logse = 0;
  size_t hits[3] = {0, 0, 0}, hits_bar[3] = {0, 0, 0};
  const double thr[3] = {1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};
  const double thr_bar[3] = {1.025, 1.025 * 1.025, 1.025 * 1.025 * 1.025};

  for (size_t i = 0; i < ref.size(); ++i) {
    double r = ref[i];
    if (!valid_sample(ref[i]) || r < range.range_min || r > range.range_max) continue;
    double p = pred[i];
    if (!valid_sample(pred[i]) || p <= 0.0) {
      ++m.n_failed_pixels;
      continue;
    }
    double diff = p - r;
    sum_abs += std::abs(diff) / r;
    sum_sq += diff * diff / r;
    sum_se += diff * diff;
    double lg = std::log(p) - std::log(r);
    sum_logse += lg * lg;
    double ratio = std::max(p / r, r / p);
    for (int t = 0; t < 3; ++t) {
      if (ratio < thr[t]) ++hits[t];
      if (ratio < thr_bar[t]) ++hits_bar[t];
    }
    ++m.n_pixels;
  }
  if (m.n_pixels == 0)
    raise(Errc::EmptyEvaluation, "no shared valid pixel inside the depth range");

  double n = static_cast<double>(m.n_pixels);
  m.abs_rel = sum_abs / n;
  m.sq_rel = sum_sq / n;
  m.rmse = std::sqrt(sum_se / n);
  m.log_rmse = std::sqrt(sum_logse / n);
  for (int t = 0; t < 3; ++t) {
    m.delta[t] = hits[t] / n;
    m.delta_bar[t] = hits_bar[t] / n;
  }
  return m;
}

MetricsReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) raise(Errc::EmptyEvaluation, "nothing to aggregate");
  MetricsReport out;
  double n_total = 0;
  for (const auto& r : reports) {
    double n = static_cast<double>(r.n_pixels);
    n_total += n;
    out.abs_rel += r.abs_rel * n;
    out.sq_rel += r.sq_rel * n;
    out.rmse += r.rmse * r.rmse * n;
    out.log_rmse += r.log_rmse * r.log_rmse * n;
    for (int t = 0; t < 3; ++t) {
      out.delta[t] += r.delta[t] * n;
      out.delta_bar[t] += r.delta_bar[t] * n;
    }
    out.n_pixels += r.n_pixels;
    out.n_frames += r.n_frames;
    out.n_failed_frames += r.n_failed_frames;
    out.n_failed_pixels += r.n_failed_pixels;
  }
  if (n_total <= 0) raise(Errc::EmptyEvaluation, "aggregating empty reports");
  out.abs_rel /= n_total;
  out.sq_rel /= n_total;
  out.rmse = std::sqrt(out.rmse / n_total);
  out.log_rmse = std::sqrt(out.log_rmse / n_total);
  for (int t = 0; t < 3; ++t) {
    out.delta[t] /= n_total;
    out.delta_bar[t] /= n_total;
  }
  return out;
}

MetricsReport aggregate_frame_mean(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) raise(Errc::EmptyEvaluation, "nothing to aggregate");
  MetricsReport out;
  double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    out.abs_rel += r.abs_rel / n;
    out.sq_rel += r.sq_rel / n;
    out.rmse += r.rmse / n;
    out.log_rmse += r.log_rmse / n;
    for (int t = 0; t < 3; ++t) {
      out.delta[t] += r.delta[t] / n;
      out.delta_bar[t] += r.delta_bar[t] / n;
    }
    out.n_pixels += r.n_pixels;
    out.n_frames += r.n_frames;
    out.n_failed_frames += r.n_failed_frames;
    out.n_failed_pixels += r.n_failed_pixels;
  }
  return out;
}

Raster<float> error_map(const DepthMap& pred, const DepthMap& ref) {
  Raster<float> out(ref.rows(), ref.cols(), 0.0f);
  for (size_t i = 0; i < ref.size(); ++i)
    if (valid_sample(pred[i]) && valid_sample(ref[i]))
      out[i] = std::abs(pred[i] - ref[i]) / ref[i];
  return out;
}

namespace {

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

}  // namespace

std::string report_to_json(const MetricsReport& pooled, const MetricsReport& frame_mean,
                           const RangeMask& range) {
  nlohmann::json j;
  j["schema"] = 1;
  j["range_m"] = {range.range_min, range.range_max};
  j["pixel_pooled"] = metrics_json(pooled);
  j["frame_mean"] = metrics_json(frame_mean);
  return j.dump(2) + "\n";
}

std::string report_to_markdown(const MetricsReport& m) {
  std::ostringstream out;
  out << "| AbsRel | SqRel | RMSE | LogRMSE | d<1.25 | d<1.25^2 | d<1.25^3 "
         "| d<1.025 | d<1.025^2 | d<1.025^3 |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "| %.4f | %.4f | %.3f | %.4f | %.3f | %.3f | %.3f | %.3f | %.3f | %.3f |\n",
                m.abs_rel, m.sq_rel, m.rmse, m.log_rmse, m.delta[0], m.delta[1], m.delta[2],
                m.delta_bar[0], m.delta_bar[1], m.delta_bar[2]);
  out << buf;
  return out.str();
}

void emit_report(const MetricsReport& pooled, const MetricsReport& frame_mean,
                 const RangeMask& range, const std::string& json_path,
                 const std::string& markdown_path) {
  {
    std::ofstream out(json_path);
    if (!out) raise(Errc::FormatError, "cannot write " + json_path);
    out << report_to_json(pooled, frame_mean, range);
  }
  if (!markdown_path.empty()) {
    std::ofstream out(markdown_path);
    if (!out) raise(Errc::FormatError, "cannot write " + markdown_path);
    out << report_to_markdown(pooled);
  }
}

}  // namespace tandepth
