#include "tandepth/synth.hpp"

#include <cmath>

#include "tandepth/error.hpp"
#include "tandepth/rng.hpp"

namespace tandepth {

double AnalyticTerrain::height(double x, double y) const {
  switch (kind) {
    case Kind::Plane:
      return base_z;
    case Kind::LinearSlope:
      return base_z + grade * y;
    case Kind::SinusoidalHills:
      return base_z + amplitude * std::sin(2.0 * M_PI * x / wavelength) *
                          std::sin(2.0 * M_PI * y / wavelength);
    case Kind::PlanePlusBoxes: {
      double h = base_z;
      for (const auto& b : boxes)
        if (x >= b.x_min && x <= b.x_max && y >= b.y_min && y <= b.y_max)
          h = std::max(h, base_z + b.height);
      return h;
    }
  }
  return base_z;
}

DepthMap render_reference_depth(const AnalyticTerrain& terrain, const Pose& pose,
                                const Intrinsics& k, double max_range) {
  validate_intrinsics(k);
  validate_pose(pose);

  DepthMap depth(k.height, k.width, 0.0f);
  Eigen::Matrix3d world_from_cam = pose.rotation.transpose();
  const bool plane = terrain.kind == AnalyticTerrain::Kind::Plane;

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      Eigen::Vector3d dir_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      Eigen::Vector3d w = world_from_cam * dir_cam;  // camera-frame z == ray parameter

      if (plane) {
        if (w.z() >= -1e-12) continue;  // never descends to the plane
        double t = (terrain.base_z - pose.position.z()) / w.z();
        if (t <= 0.0 || t > max_range) continue;
        depth(v, u) = static_cast<float>(t);
        continue;
      }

      auto above = [&](double t) {
        Eigen::Vector3d p = pose.position + t * w;
        return p.z() - terrain.height(p.x(), p.y());
      };
      double t_prev = 1e-3;
      if (above(t_prev) <= 0.0) continue;  // camera effectively on the terrain
      double hit = 0.0;
      for (double t = 1.0; t <= max_range; t += 1.0) {
        if (above(t) <= 0.0) {
          double lo = t_prev, hi = t;
          while (hi - lo > 1e-6) {
            double mid = 0.5 * (lo + hi);
            (above(mid) <= 0.0 ? hi : lo) = mid;
          }
          hit = 0.5 * (lo + hi);
          break;
        }
        t_prev = t;
      }
      if (hit > 0.0) depth(v, u) = static_cast<float>(hit);
    }
  }
  return depth;
}

GdemCloud sample_synthetic_gdem(const AnalyticTerrain& terrain, const GridExtent& extent,
                                double spacing, double sigma_z, uint64_t seed) {
  if (!(spacing > 0)) raise(Errc::ConfigError, "grid spacing must be positive");
  GdemCloud cloud;
  Rng rng(seed, 7);
  for (double y = extent.y_min; y <= extent.y_max + 1e-9; y += spacing) {
    for (double x = extent.x_min; x <= extent.x_max + 1e-9; x += spacing) {
      double z = terrain.height(x, y);
      if (sigma_z > 0.0) z += sigma_z * rng.gaussian();
      cloud.points.emplace_back(x, y, z);
    }
  }
  return cloud;
}

DisparityMap make_relative_disparity(const DepthMap& ref_depth, double s0, double t0, double sigma,
                                     uint64_t seed) {
  if (!(s0 > 0)) raise(Errc::ConfigError, "s0 must be positive");
  DisparityMap out(ref_depth.rows(), ref_depth.cols(), 0.0f);
  Rng rng(seed, 13);
  for (size_t i = 0; i < ref_depth.size(); ++i) {
    if (!valid_sample(ref_depth[i])) continue;
    double disp = 1.0 / static_cast<double>(ref_depth[i]);
    if (sigma > 0.0) disp *= std::exp(sigma * rng.gaussian());
    out[i] = static_cast<float>((disp - t0) / s0);
  }
  return out;
}

}  // namespace tandepth
