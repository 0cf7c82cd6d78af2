#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/raster.hpp"

namespace tandepth {

struct RoughScaleParams {
  double s_bar = 1.0;  // disparity-space scale, > 0
  double t_bar = 0.0;  // disparity-space shift
};

struct CsfParams {
  double cloth_resolution = 1.5;      // meters
  double class_threshold = 0.5;       // meters
  int rigidity = 1;                   // constraint passes per iteration, 1..3
  double time_step = 0.65;
  double gravity_displacement = 0.2 * 0.65 * 0.65;  // meters per step^2
  int max_iterations = 500;
  double stop_epsilon = 0.005;        // meters
};

enum class CsfProfile { Default, Cluttered };

// Base cloth resolution / classification threshold before the cf division.
inline std::pair<double, double> csf_profile_bases(CsfProfile profile) {
  return profile == CsfProfile::Cluttered ? std::pair{0.5, 1.25} : std::pair{1.5, 0.5};
}

// D = 1/(s_bar * d + t_bar); pixels where the denominator is <= 0 become
// invalid. Throws RoughScaleDiverged when more than half of the valid input
// turns invalid.
DepthMap rough_scale(const DisparityMap& disp, const RoughScaleParams& params);

// cf = (agl / sin(pitch)) / median(rough depth over the central 35 rows).
// The sin uses pitch measured from the horizontal, so nadir gives agl
// exactly. Throws CfUndefined without valid central pixels.
double adjustment_factor(const DepthMap& rough, double pitch_deg, double agl_m);

// Optional per-iteration record for inspecting the simulation.
struct CsfTrace {
  int iterations = 0;
  double final_max_displacement = 0;
  std::vector<std::vector<float>> heights;       // per iteration, per particle
  std::vector<std::vector<uint8_t>> frozen;      // same layout
};

// Cloth Simulation Filter over the inverted cloud (z -> -z): a particle grid
// at cloth_resolution falls under gravity, clamps and freezes on the nearest
// point's inverted height, and relaxes spring constraints rigidity times per
// iteration. A point is ground when its inverted height is within
// class_threshold of the bilinearly interpolated cloth. Returns one label
// per input point (1 = ground).
std::vector<uint8_t> csf_classify(const std::vector<Eigen::Vector3d>& cloud,
                                  const CsfParams& params, CsfTrace* trace = nullptr);

// Full ground segmentation for one frame: rough-scale the disparity, derive
// cf, back-project, run the CSF with every length constant divided by cf,
// and map labels back to pixels. csf_input_size (rows, cols) area-averages
// the disparity before the CSF and upsamples the mask nearest-neighbor.
GroundMask segment_ground(const DisparityMap& disp, const Pose& pose, const Intrinsics& k,
                          const RoughScaleParams& rough, CsfProfile profile = CsfProfile::Default,
                          std::optional<std::pair<int, int>> csf_input_size = std::nullopt);

}  // namespace tandepth
