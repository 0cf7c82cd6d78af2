#include "tandepth/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tandepth/error.hpp"

namespace tandepth {

namespace {

constexpr double kDeg = M_PI / 180.0;

float median_valid(const Raster<float>& r, const Raster<float>& other) {
  std::vector<float> vals;
  vals.reserve(r.size());
  for (size_t i = 0; i < r.size(); ++i)
    if (valid_sample(r[i]) && valid_sample(other[i])) vals.push_back(r[i]);
  if (vals.empty()) raise(Errc::NoOverlap, "no shared valid pixel");
  auto mid = vals.begin() + vals.size() / 2;
  std::nth_element(vals.begin(), mid, vals.end());
  float hi = *mid;
  if (vals.size() % 2 == 1) return hi;
  std::nth_element(vals.begin(), vals.begin() + vals.size() / 2 - 1, vals.end());
  return 0.5f * (vals[vals.size() / 2 - 1] + hi);
}

}  // namespace

DisparityMap ssi_normalize(const DisparityMap& d) {
  std::vector<float> vals;
  vals.reserve(d.size());
  for (size_t i = 0; i < d.size(); ++i)
    if (valid_sample(d[i])) vals.push_back(d[i]);
  if (vals.empty()) raise(Errc::DegenerateDisparity, "no valid disparity pixel");
  auto mid = vals.begin() + vals.size() / 2;
  std::nth_element(vals.begin(), mid, vals.end());
  double median = *mid;
  if (vals.size() % 2 == 0) {
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2 - 1, vals.end());
    median = 0.5 * (median + vals[vals.size() / 2 - 1]);
  }
  double mad = 0.0;
  for (float v : vals) mad += std::abs(v - median);
  mad /= static_cast<double>(vals.size());
  if (mad <= 0.0)
    raise(Errc::DegenerateDisparity, "constant disparity map (zero mean absolute deviation)");

  DisparityMap out(d.rows(), d.cols(), 0.0f);
  for (size_t i = 0; i < d.size(); ++i)
    if (valid_sample(d[i])) out[i] = static_cast<float>((d[i] - median) / mad);
  return out;
}

AlignResult lsq_align(const std::vector<double>& pred, const std::vector<double>& ref,
                      size_t n_min) {
  if (pred.size() != ref.size())
    raise(Errc::ConfigError, "paired samples of different length");
  size_t n = pred.size();
  if (n < n_min)
    raise(Errc::InsufficientAnchors,
          std::to_string(n) + " anchor pairs, need at least " + std::to_string(n_min));

  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += pred[i];
    my += ref[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double dx = pred[i] - mx;
    sxx += dx * dx;
    sxy += dx * (ref[i] - my);
  }
  if (sxx <= 0.0) raise(Errc::DegenerateSystem, "zero variance in the predicted disparities");

  AlignResult result;
  result.s = sxy / sxx;
  result.t = my - result.s * mx;
  result.n = n;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = result.s * pred[i] + result.t - ref[i];
    ss += r * r;
  }
  result.residual_rms = std::sqrt(ss / n);
  if (result.s <= 0.0)
    raise(Errc::NonPositiveScale,
          "least-squares scale " + std::to_string(result.s) + " is not positive");
  return result;
}

double median_scale(const DepthMap& pred, const DepthMap& ref) {
  float mp = median_valid(pred, ref);
  float mr = median_valid(ref, pred);
  if (mp == 0.0f) raise(Errc::DegenerateSystem, "zero median predicted depth");
  return static_cast<double>(mr) / static_cast<double>(mp);
}

DepthMap apply_scale(const DisparityMap& d, const ScaleParams& params) {
  DepthMap out(d.rows(), d.cols(), 0.0f);
  for (size_t i = 0; i < d.size(); ++i) {
    if (!valid_sample(d[i])) continue;
    double den = params.s * d[i] + params.t;
    if (den <= 0.0) continue;
    out[i] = static_cast<float>(1.0 / den);
  }
  return out;
}

GroundMask normals_ground_mask(const DepthMap& rough, const Intrinsics& k, const Pose& pose,
                               double max_angle_deg) {
  Raster<Eigen::Vector3f> normals = surface_normals(rough, k);
  Eigen::Vector3f up_cam = (pose.rotation * Eigen::Vector3d::UnitZ()).cast<float>();
  float cos_limit = static_cast<float>(std::cos(max_angle_deg * kDeg));
  GroundMask mask(rough.rows(), rough.cols(), 0);
  for (size_t i = 0; i < normals.size(); ++i) {
    const Eigen::Vector3f& n = normals[i];
    if (n.squaredNorm() < 0.5f) continue;  // invalid
    if (n.dot(up_cam) >= cos_limit) mask[i] = 1;
  }
  return mask;
}

std::vector<double> height_disparity_rows(const Intrinsics& k, double pitch_deg, double agl_m) {
  std::vector<double> rows(k.height, 0.0);
  double sp = std::sin(pitch_deg * kDeg);
  double cp = std::cos(pitch_deg * kDeg);
  for (int v = 0; v < k.height; ++v) {
    if (!row_ray_angle(v, k, pitch_deg)) continue;
    double dy = (v + 0.5 - k.cy) / k.fy;
    double disp = (sp + dy * cp) / agl_m;
    if (disp > 0.0) rows[v] = disp;
  }
  return rows;
}

ScaleOutcome camera_height_scale(const DisparityMap& d, const Pose& pose, const Intrinsics& k,
                                 const GroundMask& ground, size_t n_min) {
  validate_pose(pose);
  std::vector<double> h_rows = height_disparity_rows(k, pose.pitch_deg, pose.agl_m);
  if (std::all_of(h_rows.begin(), h_rows.end(), [](double x) { return x == 0.0; }))
    raise(Errc::HorizonOnly, "no image row intersects the ground plane");

  std::vector<double> pred, ref;
  for (int v = 0; v < d.rows(); ++v) {
    if (h_rows[v] == 0.0) continue;
    for (int u = 0; u < d.cols(); ++u) {
      if (!ground(v, u) || !valid_sample(d(v, u))) continue;
      pred.push_back(d(v, u));
      ref.push_back(h_rows[v]);
    }
  }
  AlignResult fit = lsq_align(pred, ref, n_min);
  ScaleOutcome outcome;
  outcome.params = {fit.s, fit.t};
  outcome.n_anchors = fit.n;
  outcome.residual_rms = fit.residual_rms;
  outcome.depth = apply_scale(d, outcome.params);
  return outcome;
}

std::pair<double, DepthMap> camera_height_single_factor(const DepthMap& rough, const Pose& pose,
                                                        const Intrinsics& k,
                                                        const GroundMask& ground) {
  std::vector<double> heights;
  for (int v = 0; v < rough.rows(); ++v) {
    for (int u = 0; u < rough.cols(); ++u) {
      if (!ground(v, u) || !valid_sample(rough(v, u))) continue;
      double z = rough(v, u);
      Eigen::Vector3d pc(z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z);
      double drop = -(pose.rotation.transpose() * pc).z();
      if (drop > 0.0) heights.push_back(drop);
    }
  }
  if (heights.size() < 10)
    raise(Errc::InsufficientAnchors,
          "only " + std::to_string(heights.size()) + " ground pixels with positive drop");
  auto mid = heights.begin() + heights.size() / 2;
  std::nth_element(heights.begin(), mid, heights.end());
  double med = *mid;
  double sf = pose.agl_m / med;
  DepthMap out(rough.rows(), rough.cols(), 0.0f);
  for (size_t i = 0; i < rough.size(); ++i)
    if (valid_sample(rough[i])) out[i] = static_cast<float>(sf * rough[i]);
  return {sf, out};
}

ScaleOutcome tandepth_scale(const DisparityMap& d, const SparseGroundMap& anchors, size_t n_min) {
  if (anchors.rows() != d.rows() || anchors.cols() != d.cols())
    raise(Errc::ConfigError, "anchor map dimensions do not match the disparity");
  std::vector<double> pred, ref;
  for (int v = 0; v < d.rows(); ++v) {
    for (int u = 0; u < d.cols(); ++u) {
      double z = anchors(v, u);
      if (z == 0.0 || !valid_sample(d(v, u))) continue;
      pred.push_back(d(v, u));
      ref.push_back(1.0 / z);
    }
  }
  AlignResult fit = lsq_align(pred, ref, n_min);
  ScaleOutcome outcome;
  outcome.params = {fit.s, fit.t};
  outcome.n_anchors = fit.n;
  outcome.residual_rms = fit.residual_rms;
  outcome.depth = apply_scale(d, outcome.params);
  return outcome;
}

ScaleOutcome reference_scale(const DisparityMap& d, const DepthMap& ref, const RangeMask& range,
                             size_t n_min) {
  if (ref.rows() != d.rows() || ref.cols() != d.cols())
    raise(Errc::ConfigError, "reference depth dimensions do not match the disparity");
  std::vector<double> pred, target;
  for (size_t i = 0; i < d.size(); ++i) {
    if (!valid_sample(d[i]) || !valid_sample(ref[i])) continue;
    if (ref[i] < range.range_min || ref[i] > range.range_max) continue;
    pred.push_back(d[i]);
    target.push_back(1.0 / ref[i]);
  }
  AlignResult fit = lsq_align(pred, target, n_min);
  ScaleOutcome outcome;
  outcome.params = {fit.s, fit.t};
  outcome.n_anchors = fit.n;
  outcome.residual_rms = fit.residual_rms;
  outcome.depth = apply_scale(d, outcome.params);
  return outcome;
}

}  // namespace tandepth
