#include "tandepth/groundseg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tandepth/error.hpp"
#include "tandepth/log.hpp"

namespace tandepth {

namespace {

constexpr double kDamping = 0.01;
constexpr size_t kMaxClothCells = 4u << 20;

double median_of(std::vector<double>& v) {
  size_t n = v.size();
  auto mid = v.begin() + n / 2;
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

// One bisection pass over a spring: movable ends step toward each other by
// a quarter of the gap each, a single movable end by half; frozen ends stay.
inline void relax(std::vector<double>& z, const std::vector<uint8_t>& frozen, size_t a, size_t b) {
  double d = z[b] - z[a];
  if (!frozen[a] && !frozen[b]) {
    z[a] += d * 0.25;
    z[b] -= d * 0.25;
  } else if (!frozen[a]) {
    z[a] += d * 0.5;
  } else if (!frozen[b]) {
    z[b] -= d * 0.5;
  }
}

}  // namespace

DepthMap rough_scale(const DisparityMap& disp, const RoughScaleParams& params) {
  if (!(params.s_bar > 0))
    raise(Errc::ConfigError, "s_bar must be positive, got " + std::to_string(params.s_bar));
  DepthMap out(disp.rows(), disp.cols(), 0.0f);
  size_t valid_in = 0, valid_out = 0;
  for (size_t i = 0; i < disp.size(); ++i) {
    float d = disp[i];
    if (!valid_sample(d)) continue;
    ++valid_in;
    double den = params.s_bar * d + params.t_bar;
    if (den <= 0.0) continue;
    out[i] = static_cast<float>(1.0 / den);
    ++valid_out;
  }
  if (valid_in == 0 || (valid_in - valid_out) * 2 > valid_in)
    raise(Errc::RoughScaleDiverged, std::to_string(valid_in - valid_out) + " of " +
                                        std::to_string(valid_in) +
                                        " pixels have non-positive scaled disparity");
  return out;
}

double adjustment_factor(const DepthMap& rough, double pitch_deg, double agl_m) {
  if (!(pitch_deg > 0) || pitch_deg > 90 || !(agl_m > 0))
    raise(Errc::ConfigError, "adjustment factor needs pitch in (0, 90] and positive agl");
  int center = rough.rows() / 2;
  int row_lo = std::max(0, center - 17);
  int row_hi = std::min(rough.rows() - 1, center + 17);
  std::vector<double> central;
  central.reserve(static_cast<size_t>(row_hi - row_lo + 1) * rough.cols());
  for (int v = row_lo; v <= row_hi; ++v)
    for (int u = 0; u < rough.cols(); ++u)
      if (valid_sample(rough(v, u))) central.push_back(rough(v, u));
  if (central.empty())
    raise(Errc::CfUndefined, "no valid rough-depth pixel in the central rows");
  double d_central = median_of(central);
  double d_star = agl_m / std::sin(pitch_deg * M_PI / 180.0);
  return d_star / d_central;
}

std::vector<uint8_t> csf_classify(const std::vector<Eigen::Vector3d>& cloud,
                                  const CsfParams& params, CsfTrace* trace) {
  if (cloud.empty()) raise(Errc::InvalidCloud, "empty point cloud");
  for (const auto& p : cloud)
    if (!p.allFinite()) raise(Errc::InvalidCloud, "non-finite point coordinate");
  if (!(params.cloth_resolution > 0) || !(params.class_threshold > 0) || params.rigidity < 1 ||
      params.rigidity > 3 || params.max_iterations < 1)
    raise(Errc::ConfigError, "invalid CSF parameters");

  const double res = params.cloth_resolution;
  const size_t n = cloud.size();

  double x_min = cloud[0].x(), x_max = x_min;
  double y_min = cloud[0].y(), y_max = y_min;
  double zi_max = -cloud[0].z();
  for (const auto& p : cloud) {
    x_min = std::min(x_min, p.x());
    x_max = std::max(x_max, p.x());
    y_min = std::min(y_min, p.y());
    y_max = std::max(y_max, p.y());
    zi_max = std::max(zi_max, -p.z());
  }
  const double x0 = x_min - 2.0 * res;
  const double y0 = y_min - 2.0 * res;
  const long nx = static_cast<long>(std::ceil((x_max + 2.0 * res - x0) / res)) + 1;
  const long ny = static_cast<long>(std::ceil((y_max + 2.0 * res - y0) / res)) + 1;
  if (nx <= 0 || ny <= 0 || static_cast<size_t>(nx) * ny > kMaxClothCells)
    raise(Errc::CsfFailed, "cloth grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                               " at resolution " + std::to_string(res) + " is not workable");
  const size_t n_particles = static_cast<size_t>(nx) * ny;
  auto node = [&](long ix, long iy) { return static_cast<size_t>(iy) * nx + ix; };

  // points binned by the grid cell of their XY, for nearest-point queries
  std::vector<std::vector<int>> bins(n_particles);
  for (size_t i = 0; i < n; ++i) {
    long ix = std::clamp(static_cast<long>(std::floor((cloud[i].x() - x0) / res)), 0L, nx - 1);
    long iy = std::clamp(static_cast<long>(std::floor((cloud[i].y() - y0) / res)), 0L, ny - 1);
    bins[node(ix, iy)].push_back(static_cast<int>(i));
  }

  // per-particle supporting height: inverted z of the nearest point in XY
  std::vector<double> support(n_particles);
  long max_ring = std::max(nx, ny);
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      double px = x0 + ix * res, py = y0 + iy * res;
      double best_d2 = std::numeric_limits<double>::infinity();
      int best = -1;
      long stop_ring = max_ring;
      for (long r = 0; r <= stop_ring; ++r) {
        for (long dy = -r; dy <= r; ++dy) {
          long cy = iy + dy;
          if (cy < 0 || cy >= ny) continue;
          long step = (std::abs(dy) == r) ? 1 : 2 * r;
          if (r == 0) step = 1;
          for (long dx = -r; dx <= r; dx += step) {
            long cx = ix + dx;
            if (cx < 0 || cx >= nx) continue;
            for (int pi : bins[node(cx, cy)]) {
              double ddx = cloud[pi].x() - px, ddy = cloud[pi].y() - py;
              double d2 = ddx * ddx + ddy * ddy;
              if (d2 < best_d2) {
                best_d2 = d2;
                best = pi;
              }
            }
          }
        }
        if (best >= 0 && stop_ring == max_ring)
          stop_ring = std::min(max_ring,
                               static_cast<long>(std::ceil(std::sqrt(best_d2) / res)) + 1);
      }
      support[node(ix, iy)] = -cloud[best].z();
    }
  }

  std::vector<double> z(n_particles, zi_max + res);
  std::vector<double> z_prev(z);
  std::vector<uint8_t> frozen(n_particles, 0);

  if (trace) {
    trace->heights.clear();
    trace->frozen.clear();
  }

  int it = 0;
  double max_disp = 0.0;
  std::vector<double> z_start(n_particles);
  for (it = 0; it < params.max_iterations; ++it) {
    z_start = z;
    for (size_t i = 0; i < n_particles; ++i) {
      if (frozen[i]) continue;
      double nz = z[i] + (z[i] - z_prev[i]) * (1.0 - kDamping) - params.gravity_displacement;
      z_prev[i] = z[i];
      z[i] = nz;
      if (z[i] <= support[i]) {
        z[i] = support[i];
        frozen[i] = 1;
      }
    }
    for (int pass = 0; pass < params.rigidity; ++pass) {
      for (long iy = 0; iy < ny; ++iy) {
        for (long ix = 0; ix < nx; ++ix) {
          size_t a = node(ix, iy);
          if (ix + 1 < nx) relax(z, frozen, a, node(ix + 1, iy));
          if (iy + 1 < ny) relax(z, frozen, a, node(ix, iy + 1));
        }
      }
    }
    max_disp = 0.0;
    for (size_t i = 0; i < n_particles; ++i)
      max_disp = std::max(max_disp, std::abs(z[i] - z_start[i]));
    if (trace) {
      trace->heights.emplace_back(z.begin(), z.end());
      trace->frozen.push_back(frozen);
    }
    if (max_disp < params.stop_epsilon) {
      ++it;
      break;
    }
  }
  if (trace) {
    trace->iterations = it;
    trace->final_max_displacement = max_disp;
  }

  std::vector<uint8_t> labels(n, 0);
  for (size_t i = 0; i < n; ++i) {
    double gx = (cloud[i].x() - x0) / res;
    double gy = (cloud[i].y() - y0) / res;
    long ix = std::clamp(static_cast<long>(std::floor(gx)), 0L, nx - 2);
    long iy = std::clamp(static_cast<long>(std::floor(gy)), 0L, ny - 2);
    double fx = std::clamp(gx - ix, 0.0, 1.0);
    double fy = std::clamp(gy - iy, 0.0, 1.0);
    double cz = (1 - fx) * (1 - fy) * z[node(ix, iy)] + fx * (1 - fy) * z[node(ix + 1, iy)] +
                (1 - fx) * fy * z[node(ix, iy + 1)] + fx * fy * z[node(ix + 1, iy + 1)];
    labels[i] = std::abs(-cloud[i].z() - cz) < params.class_threshold ? 1 : 0;
  }
  return labels;
}

GroundMask segment_ground(const DisparityMap& disp, const Pose& pose, const Intrinsics& k,
                          const RoughScaleParams& rough_params, CsfProfile profile,
                          std::optional<std::pair<int, int>> csf_input_size) {
  validate_intrinsics(k);
  validate_pose(pose);
  if (disp.rows() != k.height || disp.cols() != k.width)
    raise(Errc::ConfigError, "disparity raster does not match the intrinsics dimensions");

  if (csf_input_size) {
    auto [rows, cols] = *csf_input_size;
    if (rows < 2 || cols < 2 || rows > disp.rows() || cols > disp.cols())
      raise(Errc::ConfigError, "csf input size must downscale the raster");
    DisparityMap small(rows, cols, 0.0f);
    for (int v = 0; v < rows; ++v) {
      int v0 = v * disp.rows() / rows;
      int v1 = std::max(v0 + 1, (v + 1) * disp.rows() / rows);
      for (int u = 0; u < cols; ++u) {
        int u0 = u * disp.cols() / cols;
        int u1 = std::max(u0 + 1, (u + 1) * disp.cols() / cols);
        double sum = 0.0;
        int n = 0;
        for (int sv = v0; sv < v1; ++sv)
          for (int su = u0; su < u1; ++su)
            if (disp(sv, su) != 0.0f) {
              sum += disp(sv, su);
              ++n;
            }
        small(v, u) = n ? static_cast<float>(sum / n) : 0.0f;
      }
    }
    Intrinsics ks = k;
    double sx = static_cast<double>(cols) / k.width;
    double sy = static_cast<double>(rows) / k.height;
    ks.fx *= sx;
    ks.cx *= sx;
    ks.fy *= sy;
    ks.cy *= sy;
    ks.width = cols;
    ks.height = rows;
    GroundMask small_mask = segment_ground(small, pose, ks, rough_params, profile, std::nullopt);
    GroundMask mask(disp.rows(), disp.cols(), 0);
    for (int v = 0; v < disp.rows(); ++v) {
      int sv = std::min(rows - 1, v * rows / disp.rows());
      for (int u = 0; u < disp.cols(); ++u) {
        int su = std::min(cols - 1, u * cols / disp.cols());
        mask(v, u) = small_mask(sv, su);
      }
    }
    return mask;
  }

  DepthMap rough = rough_scale(disp, rough_params);
  double cf = adjustment_factor(rough, pose.pitch_deg, pose.agl_m);

  auto [base_res, base_th] = csf_profile_bases(profile);
  CsfParams params;
  // every length constant of the simulation is divided by cf so the
  // classification is invariant under uniform rescaling of the rough depth
  params.cloth_resolution = base_res / cf;
  params.class_threshold = base_th / cf;
  params.gravity_displacement = params.gravity_displacement / cf;
  params.stop_epsilon = params.stop_epsilon / cf;

  std::vector<int> pixels;
  std::vector<Eigen::Vector3d> cam_cloud = back_project(rough, k, &pixels);
  Eigen::Matrix3d world_from_cam = pose.rotation.transpose();
  std::vector<Eigen::Vector3d> cloud(cam_cloud.size());
  for (size_t i = 0; i < cam_cloud.size(); ++i) cloud[i] = world_from_cam * cam_cloud[i];

  std::vector<uint8_t> labels;
  try {
    labels = csf_classify(cloud, params);
  } catch (const Error& e) {
    if (e.code() == Errc::CsfFailed) throw;
    raise(Errc::CsfFailed, e.what());
  }

  GroundMask mask(disp.rows(), disp.cols(), 0);
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) mask[static_cast<size_t>(pixels[i])] = 1;
  return mask;
}

}  // namespace tandepth
