#pragma once

#include <cstddef>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/groundseg.hpp"
#include "tandepth/projection.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

struct ScaleParams {
  double s = 1.0;  // disparity-space scale
  double t = 0.0;  // disparity-space shift
};

struct ScaleOutcome {
  ScaleParams params;
  DepthMap depth;
  size_t n_anchors = 0;
  double residual_rms = 0.0;  // disparity-space fit residual
};

// Scale- and shift-invariant normalization: subtract the median, divide by
// the mean absolute deviation. Throws DegenerateDisparity on constant input.
DisparityMap ssi_normalize(const DisparityMap& d);

struct AlignResult {
  double s = 0, t = 0;
  double residual_rms = 0;
  size_t n = 0;
};

// Closed-form (s, t) minimizing sum (s*pred_i + t - ref_i)^2 via the 2x2
// normal equations. Throws InsufficientAnchors below n_min, DegenerateSystem
// on zero variance, NonPositiveScale when s <= 0.
AlignResult lsq_align(const std::vector<double>& pred, const std::vector<double>& ref,
                      size_t n_min = 10);

// median(ref) / median(pred) over the shared valid mask. Throws NoOverlap.
double median_scale(const DepthMap& pred, const DepthMap& ref);

// D = 1/(s*d + t); invalid where the input is invalid or the scaled
// disparity is <= 0.
DepthMap apply_scale(const DisparityMap& d, const ScaleParams& params);

// Fixed scaling: rough_scale under its Table-I name.
inline DepthMap fixed_scale_apply(const DisparityMap& d, const RoughScaleParams& params) {
  return rough_scale(d, params);
}

// Ground pre-selection for camera-height scaling: pixels whose rough-depth
// surface normal lies within max_angle_deg of the world vertical.
GroundMask normals_ground_mask(const DepthMap& rough, const Intrinsics& k, const Pose& pose,
                               double max_angle_deg = 15.0);

// Flat-ground disparity model, one value per row: 1 / (camera-frame Z of the
// ray-ground intersection) = (sin p + dy cos p)/agl with dy the row-center
// offset. Rows whose ray does not descend are invalid (0).
std::vector<double> height_disparity_rows(const Intrinsics& k, double pitch_deg, double agl_m);

// Aligns the relative disparity against the flat-ground model at ground
// pixels. Throws HorizonOnly when no row intersects the ground, otherwise
// propagates lsq_align errors.
ScaleOutcome camera_height_scale(const DisparityMap& d, const Pose& pose, const Intrinsics& k,
                                 const GroundMask& ground, size_t n_min = 10);

// Single-factor variant: sf = agl / median(per-ground-pixel camera height
// from the rough depth); returns sf and sf * rough.
std::pair<double, DepthMap> camera_height_single_factor(const DepthMap& rough, const Pose& pose,
                                                        const Intrinsics& k,
                                                        const GroundMask& ground);

// TanDepth: pair the disparity with inverted anchors 1/z and align.
ScaleOutcome tandepth_scale(const DisparityMap& d, const SparseGroundMap& anchors,
                            size_t n_min = 10);

// Offline upper bound: align against the dense reference disparity over the
// range-masked reference.
ScaleOutcome reference_scale(const DisparityMap& d, const DepthMap& ref, const RangeMask& range,
                             size_t n_min = 10);

}  // namespace tandepth
