#include "doctest.h"

#include <Eigen/LU>
#include <cmath>
#include <vector>

#include "tandepth/camera.hpp"
#include "tandepth/error.hpp"
#include "tandepth/rng.hpp"

using namespace tandepth;

namespace {

constexpr double kDeg = M_PI / 180.0;

Pose make_pose(double pitch_deg, const Eigen::Vector3d& position, double agl) {
  Pose pose;
  pose.rotation = pitch_rotation(pitch_deg);
  pose.position = position;
  pose.pitch_deg = pitch_deg;
  pose.agl_m = agl;
  return pose;
}

}  // namespace

TEST_SUITE("camera") {

TEST_CASE("pitch_rotation is a proper rotation with the right axes") {
  for (double p : {5.0, 30.0, 45.0, 90.0}) {
    auto r = pitch_rotation(p);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
  }
  auto nadir = pitch_rotation(90.0);
  CHECK((nadir * Eigen::Vector3d(0, 0, -1) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
  CHECK((nadir * Eigen::Vector3d(1, 0, 0) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  auto horiz = pitch_rotation(1e-9);
  CHECK((horiz * Eigen::Vector3d(0, 1, 0) - Eigen::Vector3d(0, 0, 1)).norm() < 1e-6);
}

TEST_CASE("validate_pose rejects broken inputs") {
  auto good = make_pose(45.0, {0, 0, 50}, 50.0);
  CHECK_NOTHROW(validate_pose(good));

  auto bad = good;
  bad.rotation(0, 0) = 1.1;
  CHECK_THROWS_AS(validate_pose(bad), Error);

  bad = good;
  bad.agl_m = 0.0;
  CHECK_THROWS_AS(validate_pose(bad), Error);

  bad = good;
  bad.pitch_deg = 0.0;
  CHECK_THROWS_AS(validate_pose(bad), Error);

  bad = good;
  bad.pitch_deg = 90.0;
  CHECK_NOTHROW(validate_pose(bad));

  bad = good;
  bad.position.x() = std::nan("");
  CHECK_THROWS_AS(validate_pose(bad), Error);
}

TEST_CASE("validate_intrinsics rejects broken inputs") {
  Intrinsics k{100, 100, 32, 16, 64, 32};
  CHECK_NOTHROW(validate_intrinsics(k));
  auto bad = k;
  bad.fx = 0;
  CHECK_THROWS_AS(validate_intrinsics(bad), Error);
  bad = k;
  bad.cx = 64;
  CHECK_THROWS_AS(validate_intrinsics(bad), Error);
  bad = k;
  bad.height = 0;
  CHECK_THROWS_AS(validate_intrinsics(bad), Error);
}

TEST_CASE("a point on the optical axis projects to the principal point") {
  Intrinsics k{128, 128, 32.0, 16.0, 64, 32};
  auto pose = make_pose(90.0, {0, 0, 50}, 50.0);
  auto res = project({0, 0, 40}, pose, k);  // 10 m below the camera, nadir view
  REQUIRE(res.status == ProjectStatus::Ok);
  CHECK(res.u == doctest::Approx(32.0));
  CHECK(res.v == doctest::Approx(16.0));
  CHECK(res.z == doctest::Approx(10.0));
}

TEST_CASE("points behind the camera and outside the frame are flagged") {
  Intrinsics k{128, 128, 32.0, 16.0, 64, 32};
  auto pose = make_pose(90.0, {0, 0, 50}, 50.0);
  CHECK(project({0, 0, 55}, pose, k).status == ProjectStatus::Behind);
  CHECK(project({0, 0, 50}, pose, k).status == ProjectStatus::Behind);  // zero depth
  CHECK(project({100, 0, 40}, pose, k).status == ProjectStatus::OutOfFrame);
}

TEST_CASE("a camera-frame point lands at its pixel with its depth") {
  Intrinsics k{100, 100, 32.0, 16.0, 64, 32};
  auto pose = make_pose(37.0, {3, -4, 60}, 55.0);
  Eigen::Vector3d cam_pt(0, 0, 7);
  Eigen::Vector3d world = pose.rotation.transpose() * cam_pt + pose.position;
  auto res = project(world, pose, k);
  REQUIRE(res.status == ProjectStatus::Ok);
  CHECK(std::abs(res.u - 32.0) < 1e-9);
  CHECK(std::abs(res.v - 16.0) < 1e-9);
  CHECK(std::abs(res.z - 7.0) < 1e-9);
}

TEST_CASE("back_project followed by project returns each pixel center") {
  Intrinsics k{90, 110, 20.0, 12.0, 40, 24};
  auto pose = make_pose(50.0, {10, 20, 80}, 70.0);
  DepthMap depth(24, 40);
  Rng rng(5, 0);
  for (size_t i = 0; i < depth.size(); ++i)
    depth[i] = static_cast<float>(5.0 + 60.0 * rng.uniform());
  depth(3, 7) = 0.0f;  // hole stays out of the cloud

  std::vector<int> idx;
  auto pts = back_project(depth, k, &idx);
  REQUIRE(pts.size() == depth.size() - 1);
  REQUIRE(idx.size() == pts.size());

  for (size_t i = 0; i < pts.size(); ++i) {
    int u = idx[i] % 40, v = idx[i] / 40;
    CHECK(depth(v, u) != 0.0f);
    Eigen::Vector3d world = pose.rotation.transpose() * pts[i] + pose.position;
    auto res = project(world, pose, k);
    REQUIRE(res.status != ProjectStatus::Behind);
    // rounding can push u=0 / v=0 a hair below the half-open frame bound
    if (u > 0 && v > 0) REQUIRE(res.status == ProjectStatus::Ok);
    CHECK(std::abs(res.u - u) < 1e-6);
    CHECK(std::abs(res.v - v) < 1e-6);
    CHECK(std::abs(res.z - depth(v, u)) < 1e-6);
  }
}

TEST_CASE("back_project of a uniform depth map lies on the z=1 plane") {
  Intrinsics k{50, 50, 8.0, 8.0, 16, 16};
  DepthMap depth(16, 16);
  for (size_t i = 0; i < depth.size(); ++i) depth[i] = 1.0f;
  auto pts = back_project(depth, k);
  REQUIRE(pts.size() == 256);
  for (const auto& p : pts) CHECK(p.z() == doctest::Approx(1.0));
  CHECK(pts[0].x() == doctest::Approx((0 - 8.0) / 50.0));
  CHECK(pts[0].y() == doctest::Approx((0 - 8.0) / 50.0));
}

TEST_CASE("row ray angles descend from pitch toward the horizon") {
  Intrinsics k{512, 512, 256.0, 256.0, 512, 512};

  auto top = row_ray_angle(0, k, 45.0);
  REQUIRE(top.has_value());
  CHECK(*top == doctest::Approx(45.0 + std::atan((0.5 - 256.0) / 512.0) / kDeg));
  CHECK(*top == doctest::Approx(18.46).epsilon(0.01));

  auto bottom = row_ray_angle(511, k, 45.0);
  REQUIRE(bottom.has_value());
  CHECK(*bottom > 45.0);

  std::optional<double> prev;
  for (int row = 0; row < 512; ++row) {
    auto a = row_ray_angle(row, k, 45.0);
    REQUIRE(a.has_value());
    if (prev) CHECK(*a >= *prev);
    prev = a;
  }
}

TEST_CASE("row ray angle equals the pitch at the principal row") {
  Intrinsics k{100, 100, 50.0, 10.5, 100, 21};
  auto a = row_ray_angle(10, k, 45.0);  // dy = (10.5 - 10.5)/100 = 0
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(45.0));
}

TEST_CASE("row ray angle clamps at nadir and vanishes above the horizon") {
  Intrinsics k{512, 512, 256.0, 256.0, 512, 512};
  auto low = row_ray_angle(511, k, 90.0);
  REQUIRE(low.has_value());
  CHECK(*low == 90.0);

  CHECK_FALSE(row_ray_angle(0, k, 10.0).has_value());  // 10 - 26.5 < 0
  CHECK(row_ray_angle(400, k, 10.0).has_value());
}

TEST_CASE("normals of a fronto-parallel plane point straight back") {
  Intrinsics k{200, 200, 16.0, 16.0, 32, 32};
  DepthMap depth(32, 32);
  for (size_t i = 0; i < depth.size(); ++i) depth[i] = 12.0f;
  auto n = surface_normals(depth, k);
  REQUIRE(n.rows() == 32);
  REQUIRE(n.cols() == 32);
  CHECK(n(0, 5).norm() == 0.0f);  // border
  int interior = 0;
  for (int v = 1; v < 31; ++v) {
    for (int u = 1; u < 31; ++u) {
      CHECK(n(v, u).norm() == doctest::Approx(1.0).epsilon(1e-5));
      CHECK(n(v, u).z() == doctest::Approx(-1.0).epsilon(1e-5));
      ++interior;
    }
  }
  CHECK(interior == 30 * 30);
}

TEST_CASE("normals next to holes are suppressed") {
  Intrinsics k{200, 200, 16.0, 16.0, 32, 32};
  DepthMap depth(32, 32);
  for (size_t i = 0; i < depth.size(); ++i) depth[i] = 12.0f;
  depth(10, 10) = 0.0f;
  auto n = surface_normals(depth, k);
  CHECK(n(10, 10).norm() == 0.0f);
  CHECK(n(10, 11).norm() == 0.0f);
  CHECK(n(9, 10).norm() == 0.0f);
  CHECK(n(12, 10).norm() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("normals on a rendered ground plane match the world vertical") {
  // camera 45 degrees down over flat ground: depth along each ray is
  // z_cam = agl / (sin p + dy cos p) with the ray direction known per pixel
  Intrinsics k{128, 128, 64.0, 32.0, 128, 64};
  double p = 45.0 * kDeg;
  double agl = 50.0;
  DepthMap depth(64, 128);
  for (int v = 0; v < 64; ++v) {
    for (int u = 0; u < 128; ++u) {
      double yn = (v - 32.0) / 128.0;  // integer-coordinate convention of back_project
      double denom = std::sin(p) + yn * std::cos(p);
      depth(v, u) = denom > 1e-6 ? static_cast<float>(agl / denom) : 0.0f;
    }
  }
  auto n = surface_normals(depth, k);
  Eigen::Vector3f up_cam = (pitch_rotation(45.0) * Eigen::Vector3d(0, 0, 1)).cast<float>();
  int checked = 0;
  for (int v = 2; v < 62; ++v) {
    for (int u = 2; u < 126; ++u) {
      if (n(v, u).norm() == 0.0f) continue;
      double cosang = n(v, u).normalized().dot(up_cam);
      double ang = std::acos(std::min(1.0, std::max(-1.0, cosang))) / kDeg;
      CHECK(ang < 2.0);
      ++checked;
    }
  }
  CHECK(checked > 3000);
}

TEST_CASE("normals on a synthetic sphere match the analytic field") {
  Intrinsics k{120, 120, 32.0, 32.0, 64, 64};
  Eigen::Vector3d center(0, 0, 20);
  double radius = 6.0;
  DepthMap depth(64, 64);
  for (int v = 0; v < 64; ++v) {
    for (int u = 0; u < 64; ++u) {
      Eigen::Vector3d dir((u - 32.0) / 120.0, (v - 32.0) / 120.0, 1.0);
      double a = dir.squaredNorm();
      double b = -2.0 * dir.dot(center);
      double c = center.squaredNorm() - radius * radius;
      double disc = b * b - 4 * a * c;
      if (disc <= 0) {
        depth(v, u) = 0.0f;
        continue;
      }
      double t = (-b - std::sqrt(disc)) / (2 * a);
      depth(v, u) = static_cast<float>(t * dir.z());
    }
  }
  auto n = surface_normals(depth, k);
  int checked = 0;
  for (int v = 1; v < 63; ++v) {
    for (int u = 1; u < 63; ++u) {
      if (n(v, u).norm() == 0.0f) continue;
      Eigen::Vector3d dir((u - 32.0) / 120.0, (v - 32.0) / 120.0, 1.0);
      Eigen::Vector3d hit = dir * (depth(v, u) / dir.z());
      Eigen::Vector3d analytic = (hit - center).normalized();
      // skip the silhouette band where one-pixel differences go tangent
      double rim = (hit - center).head<2>().norm() / radius;
      if (rim > 0.8) continue;
      double cosang = n(v, u).normalized().cast<double>().dot(analytic);
      double ang = std::acos(std::min(1.0, std::max(-1.0, cosang))) / kDeg;
      CHECK(ang < 3.0);
      ++checked;
    }
  }
  CHECK(checked > 400);
}

}  // TEST_SUITE
