#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bevnav {

struct CameraIntrinsics {
  int width = 64;
  int height = 64;
  double fx = 32.0, fy = 32.0;
  double cx = 32.0, cy = 32.0;
};

/// Pinhole intrinsics for a square-pixel camera with the given horizontal
/// field of view. Throws std::domain_error unless 0 < fov < 180.
CameraIntrinsics intrinsics_from_fov(int width, int height, double fov_deg);

// Four surround cameras at the agent center, yaw 0/90/180/270 degrees,
// sharing intrinsics. Depth uses the z-depth convention: distance along
// the camera forward axis, not ray length.
struct CameraRig {
  static constexpr int kNumViews = 4;
  double camera_height = 1.2;  // m above floor
  double max_range = 10.0;     // m; also the miss sentinel

  double view_yaw(int view) const { return view * (M_PI / 2.0); }
};

enum class ProjectStatus { Ok, BehindCamera, OutOfImage };

struct Projection {
  ProjectStatus status = ProjectStatus::Ok;
  double u = 0.0, v = 0.0;  // continuous pixel coordinates
  double depth = 0.0;       // z-depth (m)
};

/// Projects an agent-frame point into a view. Pixel (i, j) covers
/// [i, i+1) x [j, j+1); its center maps to (i+0.5, j+0.5).
Projection project_point(double x, double y, double z, const CameraIntrinsics& intr,
                         const CameraRig& rig, int view);

/// Inverse of project_point for continuous pixel coordinates and z-depth.
void unproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr,
                     const CameraRig& rig, int view, double& x, double& y, double& z);

}  // namespace bevnav
