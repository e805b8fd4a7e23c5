#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bevnav/camera.hpp"
#include "bevnav/scene.hpp"

namespace bevnav {

// Row-major z-depth image in meters. Misses hold the max_range sentinel.
struct DepthImage {
  int width = 0, height = 0;
  int view = 0;
  std::vector<float> depth;

  float at(int v, int u) const { return depth[static_cast<size_t>(v) * width + u]; }
  float& at(int v, int u) { return depth[static_cast<size_t>(v) * width + u]; }
};

// Row-major 8-bit RGB image.
struct ColorImage {
  int width = 0, height = 0;
  int view = 0;
  std::vector<uint8_t> rgb;

  const uint8_t* at(int v, int u) const {
    return &rgb[(static_cast<size_t>(v) * width + u) * 3];
  }
  uint8_t* at(int v, int u) { return &rgb[(static_cast<size_t>(v) * width + u) * 3]; }
};

struct RenderedView {
  DepthImage depth;
  ColorImage color;
};

/// Analytic raycast of the scene primitives (floor plane, boxes, vertical
/// cylinders) through one rig camera. Deterministic; a miss writes the
/// max_range sentinel and the background color.
RenderedView render_view(const Scene& scene, const CameraRig& rig, int view,
                         const CameraIntrinsics& intr);

std::array<RenderedView, CameraRig::kNumViews> render_rig(const Scene& scene,
                                                          const CameraRig& rig,
                                                          const CameraIntrinsics& intr);

// One agent-frame 3D point per valid (non-sentinel) depth pixel.
struct UnprojectedPoint {
  double x = 0.0, y = 0.0, z = 0.0;  // agent frame (m)
  int u = 0, v = 0;                  // source pixel
};

/// Lifts every valid depth pixel (through its center) into the agent frame.
std::vector<UnprojectedPoint> unproject_depth(const DepthImage& img,
                                              const CameraIntrinsics& intr,
                                              const CameraRig& rig, int view);

void write_ppm(const ColorImage& img, const std::string& path);
/// Writes raw little-endian float32 depth plus a JSON sidecar
/// {width, height, view, max_range} at path + ".json".
void write_depth_raw(const DepthImage& img, double max_range, const std::string& path);

}  // namespace bevnav
