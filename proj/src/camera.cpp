#include "tandepth/camera.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <cmath>
#include <string>

#include "tandepth/error.hpp"

namespace tandepth {

namespace {
constexpr double kDeg = M_PI / 180.0;
}

void validate_intrinsics(const Intrinsics& k) {
  if (!(k.fx > 0) || !(k.fy > 0) || !(k.cx > 0) || !(k.cy > 0) || k.cx >= k.width ||
      k.cy >= k.height || k.width <= 0 || k.height <= 0)
    raise(Errc::ConfigError, "invalid intrinsics: fx=" + std::to_string(k.fx) +
                                 " fy=" + std::to_string(k.fy) + " cx=" + std::to_string(k.cx) +
                                 " cy=" + std::to_string(k.cy) + " " + std::to_string(k.width) +
                                 "x" + std::to_string(k.height));
}

void validate_pose(const Pose& pose) {
  Eigen::Matrix3d rtr = pose.rotation.transpose() * pose.rotation;
  if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(pose.rotation.determinant() - 1.0) > 1e-9)
    raise(Errc::ConfigError, "rotation is not a proper rotation matrix");
  if (!(pose.agl_m > 0)) raise(Errc::ConfigError, "agl must be positive");
  if (!(pose.pitch_deg > 0) || pose.pitch_deg > 90.0)
    raise(Errc::ConfigError, "pitch must lie in (0, 90], got " + std::to_string(pose.pitch_deg));
  if (!pose.position.allFinite()) raise(Errc::ConfigError, "non-finite camera position");
}

Eigen::Matrix3d pitch_rotation(double pitch_deg) {
  double p = pitch_deg * kDeg;
  Eigen::Matrix3d r;
  // rows are the camera axes in world coordinates: x right (east),
  // y down-tilted, z forward (north, pitched down)
  r << 1, 0, 0,  //
      0, -std::sin(p), -std::cos(p),  //
      0, std::cos(p), -std::sin(p);
  return r;
}

ProjectResult project(const Eigen::Vector3d& point, const Pose& pose, const Intrinsics& k) {
  Eigen::Vector3d pc = pose.rotation * (point - pose.position);
  if (pc.z() <= 0.0) return {ProjectStatus::Behind, 0, 0, pc.z()};
  double u = k.fx * pc.x() / pc.z() + k.cx;
  double v = k.fy * pc.y() / pc.z() + k.cy;
  if (u < 0.0 || u >= k.width || v < 0.0 || v >= k.height)
    return {ProjectStatus::OutOfFrame, u, v, pc.z()};
  return {ProjectStatus::Ok, u, v, pc.z()};
}

std::vector<Eigen::Vector3d> back_project(const DepthMap& depth, const Intrinsics& k,
                                          std::vector<int>* pixel_indices) {
  std::vector<Eigen::Vector3d> points;
  points.reserve(depth.size());
  if (pixel_indices) {
    pixel_indices->clear();
    pixel_indices->reserve(depth.size());
  }
  for (int v = 0; v < depth.rows(); ++v) {
    for (int u = 0; u < depth.cols(); ++u) {
      float d = depth(v, u);
      if (!valid_sample(d)) continue;
      double z = static_cast<double>(d);
      points.emplace_back(z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z);
      if (pixel_indices) pixel_indices->push_back(v * depth.cols() + u);
    }
  }
  return points;
}

std::optional<double> row_ray_angle(int row, const Intrinsics& k, double pitch_deg) {
  double alpha = pitch_deg + std::atan((row + 0.5 - k.cy) / k.fy) / kDeg;
  if (alpha <= 0.0) return std::nullopt;
  return std::min(alpha, 90.0);
}

Raster<Eigen::Vector3f> surface_normals(const DepthMap& depth, const Intrinsics& k) {
  Raster<Eigen::Vector3f> normals(depth.rows(), depth.cols(), Eigen::Vector3f::Zero());
  auto point_at = [&](int v, int u) -> Eigen::Vector3d {
    double z = depth(v, u);
    return {z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z};
  };
  for (int v = 1; v + 1 < depth.rows(); ++v) {
    for (int u = 1; u + 1 < depth.cols(); ++u) {
      if (!valid_sample(depth(v, u)) || !valid_sample(depth(v, u - 1)) ||
          !valid_sample(depth(v, u + 1)) || !valid_sample(depth(v - 1, u)) ||
          !valid_sample(depth(v + 1, u)))
        continue;
      Eigen::Vector3d du = point_at(v, u + 1) - point_at(v, u - 1);
      Eigen::Vector3d dv = point_at(v + 1, u) - point_at(v - 1, u);
      Eigen::Vector3d n = -du.cross(dv);
      double len = n.norm();
      if (len < 1e-12) continue;
      normals(v, u) = (n / len).cast<float>();
    }
  }
  return normals;
}

}  // namespace tandepth
