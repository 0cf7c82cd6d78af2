#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "tandepth/raster.hpp"

namespace tandepth {

struct Intrinsics {
  double fx = 0, fy = 0;  // pixels
  double cx = 0, cy = 0;  // pixels
  int width = 0, height = 0;
};

// Camera axes: +Z forward, +X right, +Y down. World frame: local metric,
// ENU, z up. rotation maps world vectors into the camera frame; position is
// the camera center in the world frame.
struct Pose {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d position;
  double pitch_deg = 0;  // 0 = optical axis horizontal, 90 = nadir
  double agl_m = 0;      // height above ground level
};

// Throws ConfigError when R is not a proper rotation (1e-9), agl <= 0 or
// pitch outside (0, 90].
void validate_pose(const Pose& pose);
void validate_intrinsics(const Intrinsics& k);

// Rotation for a camera looking along +y (north) tilted down by pitch.
Eigen::Matrix3d pitch_rotation(double pitch_deg);

enum class ProjectStatus { Ok, Behind, OutOfFrame };

struct ProjectResult {
  ProjectStatus status;
  double u = 0, v = 0;  // pixel coordinates
  double z = 0;         // camera-frame depth, meters
};

ProjectResult project(const Eigen::Vector3d& point, const Pose& pose, const Intrinsics& k);

// Camera-frame points depth(u,v) * K^-1 (u, v, 1) for valid pixels,
// row-major order. When pixel_indices is given it receives the linear pixel
// index (v * width + u) of each returned point.
std::vector<Eigen::Vector3d> back_project(const DepthMap& depth, const Intrinsics& k,
                                          std::vector<int>* pixel_indices = nullptr);

// Angle of the row's central ray relative to the ground plane, degrees:
// pitch + atan((row + 0.5 - cy)/fy), clamped to 90 above; nullopt when the
// ray does not descend (alpha <= 0).
std::optional<double> row_ray_angle(int row, const Intrinsics& k, double pitch_deg);

// Unit surface normals from central differences of back-projected
// neighbors, oriented toward the camera (fronto-parallel plane yields
// (0,0,-1)). Pixels at the border or adjacent to invalid depth get the zero
// vector.
Raster<Eigen::Vector3f> surface_normals(const DepthMap& depth, const Intrinsics& k);

}  // namespace tandepth
