#include "doctest.h"

#include <cmath>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/error.hpp"
#include "tandepth/projection.hpp"
#include "tandepth/rng.hpp"

using namespace tandepth;

namespace {

Pose nadir_pose(double agl) {
  Pose pose;
  pose.rotation = pitch_rotation(90.0);
  pose.position = {0, 0, agl};
  pose.pitch_deg = 90.0;
  pose.agl_m = agl;
  return pose;
}

GroundMask full_mask(int rows, int cols, uint8_t value) {
  GroundMask m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = value;
  return m;
}

}  // namespace

TEST_SUITE("projection") {

TEST_CASE("per-pixel conflicts keep the nearest point") {
  Intrinsics k{100, 100, 16.0, 16.0, 32, 32};
  auto pose = nadir_pose(100.0);
  GdemCloud gdem;
  gdem.points = {{0, 0, 60}, {0, 0, 90}};  // depths 40 and 10, same pixel
  auto map = project_gdem(gdem, pose, k);
  CHECK(map(16, 16) == doctest::Approx(10.0));
  size_t filled = 0;
  for (size_t i = 0; i < map.size(); ++i)
    if (map[i] != 0.0) ++filled;
  CHECK(filled == 1);
}

TEST_CASE("points behind the camera never reach the map") {
  Intrinsics k{100, 100, 16.0, 16.0, 32, 32};
  auto pose = nadir_pose(50.0);
  GdemCloud gdem;
  gdem.points = {{0, 0, 70}, {0.1, 0.1, 20}};
  auto map = project_gdem(gdem, pose, k);
  size_t filled = 0;
  double value = 0;
  for (size_t i = 0; i < map.size(); ++i)
    if (map[i] != 0.0) {
      ++filled;
      value = map[i];
    }
  CHECK(filled == 1);
  CHECK(value == doctest::Approx(30.0));
}

TEST_CASE("flat terrain under a nadir camera projects at the flying height") {
  Intrinsics k{64, 64, 32.0, 32.0, 64, 64};
  auto pose = nadir_pose(50.0);
  GdemCloud gdem;
  for (double x = -20; x <= 20; x += 2.5)
    for (double y = -20; y <= 20; y += 2.5) gdem.points.emplace_back(x, y, 0.0);
  auto map = project_gdem(gdem, pose, k);
  size_t filled = 0;
  for (size_t i = 0; i < map.size(); ++i) {
    if (map[i] == 0.0) continue;
    CHECK(map[i] == doctest::Approx(50.0).epsilon(1e-9));
    ++filled;
  }
  CHECK(filled > 100);
}

TEST_CASE("an empty projection is an error") {
  Intrinsics k{100, 100, 16.0, 16.0, 32, 32};
  auto pose = nadir_pose(50.0);
  GdemCloud gdem;
  gdem.points = {{5000, 5000, 0}};
  try {
    project_gdem(gdem, pose, k);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyProjection);
  }
}

TEST_CASE("occlusion drops anchors notably behind their neighbourhood") {
  SparseGroundMap map(8, 32);
  map(4, 10) = 95.0;
  map(4, 12) = 100.0;  // 5 % behind: dropped
  map(4, 20) = 97.0;
  map(4, 22) = 100.0;  // 3 % behind: kept
  auto out = reject_occluded(map);
  CHECK(out(4, 10) == 95.0);
  CHECK(out(4, 12) == 0.0);
  CHECK(out(4, 20) == 97.0);
  CHECK(out(4, 22) == 100.0);
}

TEST_CASE("an isolated anchor survives") {
  SparseGroundMap map(8, 32);
  map(3, 15) = 120.0;
  auto out = reject_occluded(map);
  CHECK(out(3, 15) == 120.0);
}

TEST_CASE("the occlusion window spans 7 columns by 3 rows") {
  {  // 3 columns away: inside the window
    SparseGroundMap map(8, 32);
    map(4, 10) = 50.0;
    map(4, 13) = 100.0;
    CHECK(reject_occluded(map)(4, 13) == 0.0);
  }
  {  // 4 columns away: outside
    SparseGroundMap map(8, 32);
    map(4, 10) = 50.0;
    map(4, 14) = 100.0;
    CHECK(reject_occluded(map)(4, 14) == 100.0);
  }
  {  // 1 row away: inside
    SparseGroundMap map(8, 32);
    map(3, 10) = 50.0;
    map(4, 10) = 100.0;
    CHECK(reject_occluded(map)(4, 10) == 0.0);
  }
  {  // 2 rows away: outside
    SparseGroundMap map(8, 32);
    map(2, 10) = 50.0;
    map(4, 10) = 100.0;
    CHECK(reject_occluded(map)(4, 10) == 100.0);
  }
}

TEST_CASE("rejection reads a frozen snapshot, removals do not cascade") {
  SparseGroundMap map(4, 32);
  map(1, 0) = 95.0;
  map(1, 3) = 100.0;   // occluded by col 0
  map(1, 6) = 104.5;   // sees only col 3; occluded by its snapshot value
  auto out = reject_occluded(map);
  CHECK(out(1, 0) == 95.0);
  CHECK(out(1, 3) == 0.0);
  CHECK(out(1, 6) == 0.0);
}

TEST_CASE("survivors match a brute-force window minimum") {
  Rng rng(31, 0);
  SparseGroundMap map(24, 48);
  for (size_t i = 0; i < map.size(); ++i)
    if (rng.uniform() < 0.3) map[i] = 40.0 + 120.0 * rng.uniform();
  OcclusionParams params;
  auto out = reject_occluded(map, params);
  for (int v = 0; v < 24; ++v) {
    for (int u = 0; u < 48; ++u) {
      if (map(v, u) == 0.0) {
        CHECK(out(v, u) == 0.0);
        continue;
      }
      double win_min = 0.0;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -3; du <= 3; ++du) {
          if (dv == 0 && du == 0) continue;
          int vv = v + dv, uu = u + du;
          if (vv < 0 || vv >= 24 || uu < 0 || uu >= 48) continue;
          double g = map(vv, uu);
          if (g != 0.0 && (win_min == 0.0 || g < win_min)) win_min = g;
        }
      }
      bool removed = win_min != 0.0 && map(v, u) - win_min > params.threshold_rel * map(v, u);
      CHECK(out(v, u) == (removed ? 0.0 : map(v, u)));
    }
  }
}

TEST_CASE("apply_masks keeps in-mask anchors inside the range") {
  SparseGroundMap map(4, 8);
  map(0, 0) = 29.999;
  map(0, 1) = 30.0;
  map(1, 2) = 75.0;
  map(2, 3) = 150.0;
  map(3, 4) = 150.001;
  auto ground = full_mask(4, 8, 1);
  auto out = apply_masks(map, ground, RangeMask{30.0, 150.0});
  CHECK(out(0, 0) == 0.0);
  CHECK(out(0, 1) == 30.0);
  CHECK(out(1, 2) == 75.0);
  CHECK(out(2, 3) == 150.0);
  CHECK(out(3, 4) == 0.0);
}

TEST_CASE("apply_masks respects the ground mask per pixel") {
  Rng rng(77, 0);
  SparseGroundMap map(16, 16);
  GroundMask ground(16, 16);
  for (size_t i = 0; i < map.size(); ++i) {
    if (rng.uniform() < 0.5) map[i] = 20.0 + 160.0 * rng.uniform();
    ground[i] = rng.uniform() < 0.5 ? 1 : 0;
  }
  RangeMask range{30.0, 150.0};
  bool any = false;
  for (size_t i = 0; i < map.size(); ++i)
    if (map[i] != 0.0 && ground[i] && map[i] >= 30.0 && map[i] <= 150.0) any = true;
  if (!any) {
    CHECK_THROWS_AS(apply_masks(map, ground, range), Error);
    return;
  }
  auto out = apply_masks(map, ground, range);
  for (size_t i = 0; i < map.size(); ++i) {
    bool keep = map[i] != 0.0 && ground[i] != 0 && map[i] >= 30.0 && map[i] <= 150.0;
    CHECK(out[i] == (keep ? map[i] : 0.0));
  }
}

TEST_CASE("an all-false ground mask empties the anchor map") {
  SparseGroundMap map(4, 8);
  map(1, 1) = 60.0;
  auto ground = full_mask(4, 8, 0);
  try {
    apply_masks(map, ground, RangeMask{});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoGroundAnchors);
  }
}

TEST_CASE("mismatched mask shapes are a configuration error") {
  SparseGroundMap map(4, 8);
  map(0, 0) = 60.0;
  auto ground = full_mask(4, 9, 1);
  CHECK_THROWS_AS(apply_masks(map, ground, RangeMask{}), Error);
}

}  // TEST_SUITE
