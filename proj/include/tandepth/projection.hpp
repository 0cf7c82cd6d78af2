#pragma once

#include "tandepth/camera.hpp"
#include "tandepth/gdem.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

// Per-pixel metric ground anchors: camera-frame Z of the surviving GDEM
// point, 0 = empty. Double precision so anchors keep full metric accuracy.
using SparseGroundMap = Raster<double>;

struct RangeMask {
  double range_min = 30.0;
  double range_max = 150.0;
};

// Projects every GDEM point; Behind/OutOfFrame dropped, sub-pixel positions
// binned by floor, per-pixel conflicts resolved by minimum z. Throws
// EmptyProjection when nothing survives.
SparseGroundMap project_gdem(const GdemCloud& gdem, const Pose& pose, const Intrinsics& k);

struct OcclusionParams {
  int window_cols = 7;
  int window_rows = 3;
  double threshold_rel = 0.04;  // th_occ = threshold_rel * g_i
};

// Removes anchors hidden behind nearer geometry: g_i is dropped when the
// minimum over its window (excluding itself, evaluated on a frozen snapshot)
// is closer than g_i by more than threshold_rel * g_i.
SparseGroundMap reject_occluded(const SparseGroundMap& map, const OcclusionParams& params = {});

// Keeps anchors inside the ground mask with z in [range_min, range_max].
// Throws NoGroundAnchors when empty.
SparseGroundMap apply_masks(const SparseGroundMap& map, const GroundMask& ground,
                            const RangeMask& range);

}  // namespace tandepth
