#include <cmath>

#include "doctest.h"

#include "bevnav/camera.hpp"
#include "bevnav/rng.hpp"

using namespace bevnav;

TEST_CASE("intrinsics from 90 degree fov") {
  const auto intr = intrinsics_from_fov(448, 448, 90.0);
  CHECK(intr.fx == doctest::Approx(224.0).epsilon(1e-12));
  CHECK(intr.fy == doctest::Approx(224.0).epsilon(1e-12));
  CHECK(intr.cx == doctest::Approx(224.0));
  CHECK(intr.cy == doctest::Approx(224.0));

  const auto small = intrinsics_from_fov(64, 64, 90.0);
  CHECK(small.fx == doctest::Approx(32.0).epsilon(1e-12));

  CHECK_THROWS_AS(intrinsics_from_fov(448, 448, 181.0), std::domain_error);
  CHECK_THROWS_AS(intrinsics_from_fov(448, 448, 0.0), std::domain_error);
}

TEST_CASE("projection of axis points through the rig") {
  const auto intr = intrinsics_from_fov(64, 64, 90.0);
  const CameraRig rig;

  // Point straight ahead at camera height projects to the image center.
  const auto front = project_point(3.0, 0.0, rig.camera_height, intr, rig, 0);
  CHECK(front.status == ProjectStatus::Ok);
  CHECK(front.u == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(front.v == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(front.depth == doctest::Approx(3.0).epsilon(1e-12));

  const auto behind = project_point(-3.0, 0.0, rig.camera_height, intr, rig, 0);
  CHECK(behind.status == ProjectStatus::BehindCamera);

  // The same point is ahead of the back camera (view 2).
  const auto back = project_point(-3.0, 0.0, rig.camera_height, intr, rig, 2);
  CHECK(back.status == ProjectStatus::Ok);
  CHECK(back.depth == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("unprojection through front and left cameras") {
  const auto intr = intrinsics_from_fov(64, 64, 90.0);
  const CameraRig rig;
  double x, y, z;

  unproject_pixel(intr.cx, intr.cy, 2.5, intr, rig, 0, x, y, z);
  CHECK(x == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z == doctest::Approx(rig.camera_height).epsilon(1e-12));

  unproject_pixel(intr.cx, intr.cy, 2.5, intr, rig, 1, x, y, z);
  CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(z == doctest::Approx(rig.camera_height).epsilon(1e-12));
}

TEST_CASE("corner pixel obeys the pinhole lateral ratio") {
  const auto intr = intrinsics_from_fov(64, 64, 90.0);
  const CameraRig rig;
  double x, y, z;
  // Corner pixel center (0.5, 0.5) at depth 2.
  unproject_pixel(0.5, 0.5, 2.0, intr, rig, 0, x, y, z);
  const double lateral = std::abs(y);
  const double forward = std::abs(x);
  CHECK(lateral == doctest::Approx(forward * (intr.width / 2.0 - 0.5) / intr.fx)
                       .epsilon(1e-12));
}

TEST_CASE("project and unproject round trip within 1e-4 m") {
  const auto intr = intrinsics_from_fov(64, 64, 90.0);
  const CameraRig rig;
  Rng rng(20240501);
  int tested = 0;
  for (int i = 0; i < 40000 && tested < 1000; ++i) {
    const double x = rng.uniform(-8.0, 8.0);
    const double y = rng.uniform(-8.0, 8.0);
    const double z = rng.uniform(0.0, 2.5);
    const int view = static_cast<int>(rng.uniform_int(4));
    const auto p = project_point(x, y, z, intr, rig, view);
    if (p.status != ProjectStatus::Ok) continue;
    ++tested;
    double bx, by, bz;
    unproject_pixel(p.u, p.v, p.depth, intr, rig, view, bx, by, bz);
    CHECK(std::hypot(std::hypot(bx - x, by - y), bz - z) < 1e-4);
  }
  CHECK(tested == 1000);
}

TEST_CASE("four views jointly cover every azimuth") {
  const auto intr = intrinsics_from_fov(64, 64, 90.0);
  const CameraRig rig;
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const double ang = rng.uniform(0.0, 2.0 * M_PI);
    // At camera height any range is coverable; floor points need enough
    // range to rise above the lower frustum edge.
    const bool on_floor = rng.chance(0.5);
    const double r = on_floor ? rng.uniform(1.8, 6.3) : rng.uniform(0.5, 6.3);
    const double z = on_floor ? 0.0 : rig.camera_height;
    const double x = r * std::cos(ang), y = r * std::sin(ang);
    bool visible = false;
    for (int view = 0; view < 4; ++view) {
      if (project_point(x, y, z, intr, rig, view).status == ProjectStatus::Ok) {
        visible = true;
      }
    }
    CHECK(visible);
  }
}
