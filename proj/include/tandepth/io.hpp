#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <string>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/gdem.hpp"
#include "tandepth/groundseg.hpp"
#include "tandepth/projection.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

// Binary densified-GDEM container: magic "TDGD", version u32, seed u64,
// density f64 (0 = raw cloud), count u64, then count x 3 f64, all
// little-endian. Round-trips coordinates byte-exactly. Throws FormatError
// with the offending byte offset.
void save_gdem(const GdemCloud& cloud, const std::string& path);
GdemCloud load_gdem(const std::string& path);

// ASCII XYZ: one whitespace-separated triple per line, '#' starts a comment.
std::vector<Eigen::Vector3d> read_xyz(const std::string& path);

Intrinsics read_intrinsics(const std::string& path);  // {fx, fy, cx, cy, width, height}
void write_intrinsics(const Intrinsics& k, const std::string& path);

// One frame per line: {frame_id, position_xyz_m, rotation [w,x,y,z]
// world->camera, pitch_deg, agl_m?}.
struct PoseRecord {
  std::string frame_id;
  Eigen::Vector3d position;
  Eigen::Quaterniond rotation;  // world -> camera
  double pitch_deg = 0;
  std::optional<double> agl_m;
};

std::vector<PoseRecord> read_poses(const std::string& path);
void write_poses(const std::vector<PoseRecord>& poses, const std::string& path);

Pose to_pose(const PoseRecord& rec);  // requires agl_m present

void write_mask_png(const GroundMask& mask, const std::string& path);  // 0/255 gray
GroundMask read_mask_png(const std::string& path);

// Raw bitset: rows u32, cols u32 little-endian, then row-major bits packed
// MSB-first.
void write_mask_bits(const GroundMask& mask, const std::string& path);
GroundMask read_mask_bits(const std::string& path);

// Debug export of anchors as "u,v,z_m" lines.
void write_anchor_csv(const SparseGroundMap& map, const std::string& path);

}  // namespace tandepth
