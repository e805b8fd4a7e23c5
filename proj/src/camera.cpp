#include "bevnav/camera.hpp"

namespace bevnav {

CameraIntrinsics intrinsics_from_fov(int width, int height, double fov_deg) {
  if (!(fov_deg > 0.0) || !(fov_deg < 180.0)) {
    throw std::domain_error("intrinsics_from_fov: fov must be in (0, 180)");
  }
  if (width <= 0 || height <= 0) {
    throw std::domain_error("intrinsics_from_fov: image size must be positive");
  }
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  const double half = fov_deg * M_PI / 360.0;
  intr.fx = (width / 2.0) / std::tan(half);
  intr.fy = (height / 2.0) / std::tan(half);
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  return intr;
}

// Camera basis in the agent frame (x forward, y left, z up) for view yaw psi:
// forward = (cos psi, sin psi, 0), right (+u) = (sin psi, -cos psi, 0),
// down (+v) = (0, 0, -1).

Projection project_point(double x, double y, double z, const CameraIntrinsics& intr,
                         const CameraRig& rig, int view) {
  const double psi = rig.view_yaw(view);
  const double c = std::cos(psi), s = std::sin(psi);
  const double rz = z - rig.camera_height;

  const double zc = c * x + s * y;    // along forward
  const double xc = s * x - c * y;    // along right
  const double yc = -rz;              // along down

  Projection p;
  p.depth = zc;
  if (zc <= 1e-9) {
    p.status = ProjectStatus::BehindCamera;
    return p;
  }
  p.u = intr.cx + intr.fx * xc / zc;
  p.v = intr.cy + intr.fy * yc / zc;
  if (p.u < 0.0 || p.u >= intr.width || p.v < 0.0 || p.v >= intr.height) {
    p.status = ProjectStatus::OutOfImage;
  }
  return p;
}

void unproject_pixel(double u, double v, double depth, const CameraIntrinsics& intr,
                     const CameraRig& rig, int view, double& x, double& y, double& z) {
  const double psi = rig.view_yaw(view);
  const double c = std::cos(psi), s = std::sin(psi);
  const double xc = (u - intr.cx) / intr.fx * depth;
  const double yc = (v - intr.cy) / intr.fy * depth;
  const double zc = depth;

  x = c * zc + s * xc;
  y = s * zc - c * xc;
  z = rig.camera_height - yc;
}

}  // namespace bevnav
