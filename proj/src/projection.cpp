#include "tandepth/projection.hpp"

#include <cmath>
#include <string>

#include "tandepth/error.hpp"

namespace tandepth {

SparseGroundMap project_gdem(const GdemCloud& gdem, const Pose& pose, const Intrinsics& k) {
  SparseGroundMap map(k.height, k.width, 0.0);
  size_t survivors = 0;
  for (const auto& p : gdem.points) {
    ProjectResult res = project(p, pose, k);
    if (res.status != ProjectStatus::Ok) continue;
    int u = static_cast<int>(std::floor(res.u));
    int v = static_cast<int>(std::floor(res.v));
    double& cell = map(v, u);
    if (cell == 0.0) {
      cell = res.z;
      ++survivors;
    } else if (res.z < cell) {
      cell = res.z;
    }
  }
  if (survivors == 0)
    raise(Errc::EmptyProjection, "no GDEM point projects into the frame (" +
                                     std::to_string(gdem.points.size()) + " points tried)");
  return map;
}

SparseGroundMap reject_occluded(const SparseGroundMap& map, const OcclusionParams& params) {
  SparseGroundMap out = map;
  const int hc = params.window_cols / 2;
  const int hr = params.window_rows / 2;
  for (int v = 0; v < map.rows(); ++v) {
    for (int u = 0; u < map.cols(); ++u) {
      double g = map(v, u);
      if (g == 0.0) continue;
      double win_min = 0.0;
      for (int dv = -hr; dv <= hr; ++dv) {
        int vv = v + dv;
        if (vv < 0 || vv >= map.rows()) continue;
        for (int du = -hc; du <= hc; ++du) {
          int uu = u + du;
          if (uu < 0 || uu >= map.cols() || (du == 0 && dv == 0)) continue;
          double n = map(vv, uu);
          if (n != 0.0 && (win_min == 0.0 || n < win_min)) win_min = n;
        }
      }
      if (win_min != 0.0 && g - win_min > params.threshold_rel * g) out(v, u) = 0.0;
    }
  }
  return out;
}

SparseGroundMap apply_masks(const SparseGroundMap& map, const GroundMask& ground,
                            const RangeMask& range) {
  if (ground.rows() != map.rows() || ground.cols() != map.cols())
    raise(Errc::ConfigError, "ground mask dimensions do not match the anchor map");
  SparseGroundMap out(map.rows(), map.cols(), 0.0);
  size_t kept = 0;
  for (int v = 0; v < map.rows(); ++v) {
    for (int u = 0; u < map.cols(); ++u) {
      double z = map(v, u);
      if (z == 0.0 || !ground(v, u)) continue;
      if (z < range.range_min || z > range.range_max) continue;
      out(v, u) = z;
      ++kept;
    }
  }
  if (kept == 0)
    raise(Errc::NoGroundAnchors, "no anchor survives the ground and range masks");
  return out;
}

}  // namespace tandepth
