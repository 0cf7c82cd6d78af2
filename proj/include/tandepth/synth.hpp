#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/gdem.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

struct TerrainBox {
  double x_min = 0, x_max = 0;
  double y_min = 0, y_max = 0;
  double height = 0;  // above the base surface
};

// Analytic height fields used as test oracles.
struct AnalyticTerrain {
  enum class Kind { Plane, LinearSlope, SinusoidalHills, PlanePlusBoxes };

  Kind kind = Kind::Plane;
  double base_z = 0.0;
  double grade = 0.0;        // dz/dy for LinearSlope, e.g. 0.1 = 10 %
  double amplitude = 0.0;    // meters, SinusoidalHills
  double wavelength = 50.0;  // meters, SinusoidalHills
  std::vector<TerrainBox> boxes;

  double height(double x, double y) const;
};

// Per-pixel ray casting against the height field; stores camera-frame Z.
// The plane case is analytic; other terrains march 1 m along the ray and
// bisect the first crossing to 1e-6 m. Rays that never cross within
// max_range are invalid.
DepthMap render_reference_depth(const AnalyticTerrain& terrain, const Pose& pose,
                                const Intrinsics& k, double max_range = 5000.0);

struct GridExtent {
  double x_min = 0, x_max = 0;
  double y_min = 0, y_max = 0;
};

// Regular grid of terrain heights, both ends inclusive; optional gaussian
// vertical noise of the given sigma.
GdemCloud sample_synthetic_gdem(const AnalyticTerrain& terrain, const GridExtent& extent,
                                double spacing, double sigma_z = 0.0, uint64_t seed = 0);

// Relative disparity d_hat = ((1/D) * exp(sigma * g) - t0)/s0, i.e. a
// multiplicative log-normal disparity error folded through the inverse of
// the affine alignment model. At sigma = 0, lsq_align against 1/D recovers
// (s0, t0) exactly.
DisparityMap make_relative_disparity(const DepthMap& ref_depth, double s0, double t0,
                                     double sigma = 0.0, uint64_t seed = 0);

}  // namespace tandepth
