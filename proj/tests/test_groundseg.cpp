#include "doctest.h"

#include <cmath>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/error.hpp"
#include "tandepth/groundseg.hpp"
#include "tandepth/synth.hpp"

using namespace tandepth;

namespace {

Pose make_pose(double pitch_deg, const Eigen::Vector3d& position, double agl) {
  Pose pose;
  pose.rotation = pitch_rotation(pitch_deg);
  pose.position = position;
  pose.pitch_deg = pitch_deg;
  pose.agl_m = agl;
  return pose;
}

double mask_iou(const GroundMask& a, const GroundMask& b) {
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    bool ia = a[i] != 0, ib = b[i] != 0;
    if (ia && ib) ++inter;
    if (ia || ib) ++uni;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct BoxScene {
  Intrinsics k{128.0, 128.0, 128.0, 64.0, 256, 128};
  Pose pose = make_pose(45.0, {0, 0, 50}, 50.0);
  AnalyticTerrain terrain;
  DepthMap ref;
  GroundMask truth;  // pixel sees the base plane

  BoxScene() {
    terrain.kind = AnalyticTerrain::Kind::PlanePlusBoxes;
    terrain.base_z = 0.0;
    terrain.boxes = {{-20, 20, 60, 100, 10}};
    ref = render_reference_depth(terrain, pose, k);

    AnalyticTerrain plane;
    plane.kind = AnalyticTerrain::Kind::Plane;
    auto flat = render_reference_depth(plane, pose, k);
    truth = GroundMask(ref.rows(), ref.cols());
    for (size_t i = 0; i < ref.size(); ++i)
      truth[i] = ref[i] != 0.0f && std::abs(ref[i] - flat[i]) < 1e-3f ? 1 : 0;
  }
};

}  // namespace

TEST_SUITE("groundseg") {

TEST_CASE("rough_scale inverts the affine disparity model") {
  DisparityMap d(2, 2);
  d(0, 0) = 0.1f;
  d(0, 1) = 0.1f;
  d(1, 0) = 0.5f;
  d(1, 1) = 0.0f;  // invalid input stays invalid

  auto out1 = rough_scale(d, {1.0, 0.0});
  CHECK(out1(0, 0) == doctest::Approx(10.0));
  CHECK(out1(1, 0) == doctest::Approx(2.0));
  CHECK(out1(1, 1) == 0.0f);

  auto out2 = rough_scale(d, {2.0, 0.05});
  CHECK(out2(0, 0) == doctest::Approx(4.0));
  CHECK(out2(0, 1) == doctest::Approx(4.0));
}

TEST_CASE("rough_scale drops non-positive denominators") {
  DisparityMap d(1, 4);
  d(0, 0) = 0.5f;
  d(0, 1) = 0.4f;
  d(0, 2) = -0.1f;  // negative denominator
  d(0, 3) = 0.3f;
  auto out = rough_scale(d, {1.0, 0.0});
  CHECK(out(0, 0) == doctest::Approx(2.0));
  CHECK(out(0, 2) == 0.0f);
}

TEST_CASE("rough_scale raises when most of the frame inverts badly") {
  DisparityMap d(1, 4);
  d(0, 0) = 0.5f;
  d(0, 1) = -0.4f;
  d(0, 2) = -0.1f;
  d(0, 3) = -0.3f;
  try {
    rough_scale(d, {1.0, 0.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RoughScaleDiverged);
  }

  DisparityMap zeros(4, 4);
  CHECK_THROWS_AS(rough_scale(zeros, {1.0, 0.0}), Error);

  CHECK_THROWS_AS(rough_scale(d, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(rough_scale(d, {-1.0, 0.0}), Error);
}

TEST_CASE("adjustment_factor compares flat-ground depth to the central median") {
  DepthMap rough(70, 8);
  for (size_t i = 0; i < rough.size(); ++i) rough[i] = 35.35533906f;
  CHECK(adjustment_factor(rough, 45.0, 50.0) == doctest::Approx(2.0).epsilon(1e-6));

  DepthMap nadir(70, 8);
  for (size_t i = 0; i < nadir.size(); ++i) nadir[i] = 50.0f;
  CHECK(adjustment_factor(nadir, 90.0, 50.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("adjustment_factor only reads the central 35 rows") {
  DepthMap rough(70, 4);
  for (int v = 0; v < 70; ++v)
    for (int u = 0; u < 4; ++u) rough(v, u) = (v >= 18 && v <= 52) ? 35.35533906f : 1000.0f;
  CHECK(adjustment_factor(rough, 45.0, 50.0) == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("adjustment_factor uses every row of a short frame") {
  DepthMap rough(10, 4);
  for (size_t i = 0; i < rough.size(); ++i) rough[i] = 50.0f;
  CHECK(adjustment_factor(rough, 90.0, 50.0) == doctest::Approx(1.0));
}

TEST_CASE("adjustment_factor needs valid central pixels") {
  DepthMap rough(70, 8);
  for (int v = 0; v < 70; ++v)
    for (int u = 0; u < 8; ++u) rough(v, u) = (v >= 18 && v <= 52) ? 0.0f : 40.0f;
  try {
    adjustment_factor(rough, 45.0, 50.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CfUndefined);
  }
}

TEST_CASE("csf labels a flat grid as ground") {
  std::vector<Eigen::Vector3d> cloud;
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) cloud.emplace_back(x, y, 0.0);
  auto labels = csf_classify(cloud, CsfParams{});
  REQUIRE(labels.size() == cloud.size());
  size_t ground = 0;
  for (auto l : labels) ground += l;
  CHECK(static_cast<double>(ground) / labels.size() >= 0.99);
}

TEST_CASE("csf rejects elevated box tops") {
  std::vector<Eigen::Vector3d> cloud;
  std::vector<bool> on_box;
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      bool box = x >= 10 && x <= 20 && y >= 10 && y <= 20;
      cloud.emplace_back(x, y, box ? 10.0 : 0.0);
      on_box.push_back(box);
    }
  }
  CsfTrace trace;
  auto labels = csf_classify(cloud, CsfParams{}, &trace);
  size_t box_ground = 0, box_total = 0, plane_ground = 0, plane_total = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (on_box[i]) {
      ++box_total;
      box_ground += labels[i];
    } else {
      ++plane_total;
      plane_ground += labels[i];
    }
  }
  CHECK(box_ground == 0);
  CHECK(static_cast<double>(plane_ground) / plane_total >= 0.99);
  CHECK(trace.iterations >= 1);
  CHECK(trace.heights.size() == static_cast<size_t>(trace.iterations));
  CHECK(trace.frozen.size() == trace.heights.size());
  if (trace.iterations < 500) CHECK(trace.final_max_displacement < CsfParams{}.stop_epsilon);
}

TEST_CASE("csf keeps a single isolated point as ground") {
  std::vector<Eigen::Vector3d> cloud = {{3.0, 4.0, 2.0}};
  auto labels = csf_classify(cloud, CsfParams{});
  REQUIRE(labels.size() == 1);
  CHECK(labels[0] == 1);
}

TEST_CASE("csf validates its inputs") {
  std::vector<Eigen::Vector3d> empty;
  try {
    csf_classify(empty, CsfParams{});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidCloud);
  }

  std::vector<Eigen::Vector3d> bad = {{0, 0, std::nan("")}};
  CHECK_THROWS_AS(csf_classify(bad, CsfParams{}), Error);

  std::vector<Eigen::Vector3d> ok = {{0, 0, 0}, {1, 0, 0}};
  CsfParams params;
  params.cloth_resolution = 0.0;
  CHECK_THROWS_AS(csf_classify(ok, params), Error);
  params = CsfParams{};
  params.rigidity = 0;
  CHECK_THROWS_AS(csf_classify(ok, params), Error);
  params = CsfParams{};
  params.rigidity = 4;
  CHECK_THROWS_AS(csf_classify(ok, params), Error);
}

TEST_CASE("csf refuses grids that would not fit in memory") {
  std::vector<Eigen::Vector3d> cloud = {{0, 0, 0}, {1e7, 1.0, 0}};
  try {
    csf_classify(cloud, CsfParams{});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CsfFailed);
  }
}

TEST_CASE("segment_ground accepts a flat scene almost entirely") {
  Intrinsics k{128.0, 128.0, 128.0, 64.0, 256, 128};
  auto pose = make_pose(45.0, {0, 0, 50}, 50.0);
  AnalyticTerrain plane;
  auto ref = render_reference_depth(plane, pose, k);
  auto disp = make_relative_disparity(ref, 3.0, 0.2);

  auto mask = segment_ground(disp, pose, k, {6.0, 0.4});
  size_t valid = 0, ground = 0;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (disp[i] == 0.0f) continue;
    ++valid;
    ground += mask[i] != 0;
  }
  REQUIRE(valid > 0);
  CHECK(static_cast<double>(ground) / valid >= 0.95);
}

TEST_CASE("segment_ground separates boxes from the base plane") {
  BoxScene scene;
  auto disp = make_relative_disparity(scene.ref, 3.0, 0.2);
  auto mask = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4});
  CHECK(mask_iou(mask, scene.truth) >= 0.85);
}

TEST_CASE("segment_ground on a subsampled cloud stays close to full resolution") {
  BoxScene scene;
  auto disp = make_relative_disparity(scene.ref, 3.0, 0.2);
  auto full = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4});
  auto small = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4}, CsfProfile::Default,
                              std::pair{64, 128});
  REQUIRE(small.rows() == full.rows());
  REQUIRE(small.cols() == full.cols());
  CHECK(mask_iou(small, full) >= 0.9);
}

TEST_CASE("segment_ground is invariant to proportionally wrong rough parameters") {
  BoxScene scene;
  auto disp = make_relative_disparity(scene.ref, 3.0, 0.2);
  auto base = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4});
  for (double f : {0.5, 2.0, 10.0}) {
    CAPTURE(f);
    auto scaled = segment_ground(disp, scene.pose, scene.k, {6.0 * f, 0.4 * f});
    CHECK(scaled == base);
  }
}

TEST_CASE("segment_ground is deterministic") {
  BoxScene scene;
  auto disp = make_relative_disparity(scene.ref, 3.0, 0.2);
  auto a = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4});
  auto b = segment_ground(disp, scene.pose, scene.k, {6.0, 0.4});
  CHECK(a == b);
}

TEST_CASE("segment_ground checks shapes and sizes") {
  Intrinsics k{128.0, 128.0, 128.0, 64.0, 256, 128};
  auto pose = make_pose(45.0, {0, 0, 50}, 50.0);
  DisparityMap wrong(64, 256);
  CHECK_THROWS_AS(segment_ground(wrong, pose, k, {1.0, 0.0}), Error);

  DisparityMap right(128, 256);
  for (size_t i = 0; i < right.size(); ++i) right[i] = 0.02f;
  CHECK_THROWS_AS(
      segment_ground(right, pose, k, {1.0, 0.0}, CsfProfile::Default, std::pair{1, 1}), Error);
}

}  // TEST_SUITE
