#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace tandepth {

struct GdemCloud {
  enum class Source { Raw, Densified };

  std::vector<Eigen::Vector3d> points;
  std::optional<double> density_pts_per_m2;
  Source source_tag = Source::Raw;
  uint64_t seed = 0;  // sampling seed for densified clouds
};

struct TriangulatedSurface {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW in the XY projection
};

// 2.5D Delaunay triangulation of the XY projections; z carried per vertex.
// Throws DegenerateTerrain for < 3 points or an all-collinear set.
TriangulatedSurface triangulate_2_5d(const GdemCloud& raw);

// Area-weighted uniform surface sampling: llround(total XY area * density)
// points, triangle picked with probability proportional to its XY area,
// uniform barycentric position inside. Deterministic for a given seed.
// If the expected count is < 1, logs EmptyDensification and returns the
// surface vertices unchanged (raw).
GdemCloud densify(const TriangulatedSurface& surface, double density_pts_per_m2, uint64_t seed);

}  // namespace tandepth
