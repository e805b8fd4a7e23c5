#include "bevnav/render.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "json.hpp"

namespace bevnav {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

constexpr Rgb kFloorColor = {200, 200, 200};
constexpr Rgb kBackgroundColor = {20, 20, 30};

Rgb color_of(ColorId c) {
  switch (c) {
    case ColorId::Red: return {220, 40, 40};
    case ColorId::Green: return {40, 200, 40};
    case ColorId::Blue: return {40, 80, 230};
    case ColorId::Yellow: return {230, 220, 40};
    case ColorId::Gray: return {130, 130, 130};
  }
  return {130, 130, 130};
}

constexpr double kRayEps = 1e-9;

// Rays are parameterized so that t equals z-depth: the direction has unit
// projection onto the camera forward axis. All geometry is world frame.
struct Ray {
  double ox, oy, oz;
  double dx, dy, dz;
};

bool hit_floor(const Ray& r, double floor_half, double& t) {
  if (r.dz >= -1e-12) return false;
  const double tt = -r.oz / r.dz;
  if (tt <= kRayEps) return false;
  const double x = r.ox + tt * r.dx, y = r.oy + tt * r.dy;
  if (std::abs(x) > floor_half || std::abs(y) > floor_half) return false;
  t = tt;
  return true;
}

bool hit_box(const Ray& r, const Obstacle& o, double& t) {
  // Slab test against [cx-hx, cx+hx] x [cy-hy, cy+hy] x [0, height].
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double lo[3] = {o.cx - o.half_x, o.cy - o.half_y, 0.0};
  const double hi[3] = {o.cx + o.half_x, o.cy + o.half_y, o.height};
  const double org[3] = {r.ox, r.oy, r.oz};
  const double dir[3] = {r.dx, r.dy, r.dz};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-14) {
      if (org[a] < lo[a] || org[a] > hi[a]) return false;
      continue;
    }
    double t0 = (lo[a] - org[a]) / dir[a];
    double t1 = (hi[a] - org[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  if (tmin <= kRayEps) return false;  // camera on or inside the box
  t = tmin;
  return true;
}

bool hit_cylinder(const Ray& r, const Obstacle& o, double& t) {
  double best = std::numeric_limits<double>::infinity();

  // Lateral surface: quadratic in the horizontal components.
  const double ox = r.ox - o.cx, oy = r.oy - o.cy;
  const double a = r.dx * r.dx + r.dy * r.dy;
  if (a > 1e-14) {
    const double b = 2.0 * (ox * r.dx + oy * r.dy);
    const double c = ox * ox + oy * oy - o.radius * o.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double tt : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (tt <= kRayEps || tt >= best) continue;
        const double z = r.oz + tt * r.dz;
        if (z >= 0.0 && z <= o.height) best = tt;
      }
    }
  }

  // Top cap disc at z = height.
  if (std::abs(r.dz) > 1e-14) {
    const double tt = (o.height - r.oz) / r.dz;
    if (tt > kRayEps && tt < best) {
      const double x = r.ox + tt * r.dx - o.cx;
      const double y = r.oy + tt * r.dy - o.cy;
      if (x * x + y * y <= o.radius * o.radius) best = tt;
    }
  }

  if (!std::isfinite(best)) return false;
  t = best;
  return true;
}

}  // namespace

RenderedView render_view(const Scene& scene, const CameraRig& rig, int view,
                         const CameraIntrinsics& intr) {
  if (view < 0 || view >= CameraRig::kNumViews) {
    throw std::invalid_argument("render_view: view index out of range");
  }

  RenderedView out;
  out.depth.width = intr.width;
  out.depth.height = intr.height;
  out.depth.view = view;
  out.depth.depth.assign(static_cast<size_t>(intr.width) * intr.height,
                         static_cast<float>(rig.max_range));
  out.color.width = intr.width;
  out.color.height = intr.height;
  out.color.view = view;
  out.color.rgb.assign(static_cast<size_t>(intr.width) * intr.height * 3, 0);

  const double psi = rig.view_yaw(view) + scene.agent.yaw;
  const double c = std::cos(psi), s = std::sin(psi);
  // World-frame camera basis: forward, right, down.
  const double fwd[3] = {c, s, 0.0};
  const double right[3] = {s, -c, 0.0};
  const double down[3] = {0.0, 0.0, -1.0};

  Ray ray;
  ray.ox = scene.agent.x;
  ray.oy = scene.agent.y;
  ray.oz = rig.camera_height;

  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const double xr = (u + 0.5 - intr.cx) / intr.fx;
      const double yr = (v + 0.5 - intr.cy) / intr.fy;
      ray.dx = fwd[0] + xr * right[0] + yr * down[0];
      ray.dy = fwd[1] + xr * right[1] + yr * down[1];
      ray.dz = fwd[2] + xr * right[2] + yr * down[2];

      double best = rig.max_range;
      Rgb rgb = kBackgroundColor;

      double t;
      if (hit_floor(ray, scene.floor_half_size, t) && t < best) {
        best = t;
        rgb = kFloorColor;
      }
      for (const Obstacle& o : scene.obstacles) {
        const bool hit = (o.kind == ObstacleKind::Box) ? hit_box(ray, o, t)
                                                       : hit_cylinder(ray, o, t);
        if (hit && t < best) {
          best = t;
          rgb = color_of(o.color);
        }
      }

      out.depth.at(v, u) = static_cast<float>(best);
      uint8_t* px = out.color.at(v, u);
      px[0] = rgb.r;
      px[1] = rgb.g;
      px[2] = rgb.b;
    }
  }
  return out;
}

std::array<RenderedView, CameraRig::kNumViews> render_rig(const Scene& scene,
                                                          const CameraRig& rig,
                                                          const CameraIntrinsics& intr) {
  std::array<RenderedView, CameraRig::kNumViews> views;
  for (int v = 0; v < CameraRig::kNumViews; ++v) {
    views[v] = render_view(scene, rig, v, intr);
  }
  return views;
}

std::vector<UnprojectedPoint> unproject_depth(const DepthImage& img,
                                              const CameraIntrinsics& intr,
                                              const CameraRig& rig, int view) {
  std::vector<UnprojectedPoint> points;
  points.reserve(img.depth.size());
  const float sentinel = static_cast<float>(rig.max_range);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const float d = img.at(v, u);
      if (!(d > 0.0f) || d >= sentinel) continue;
      UnprojectedPoint p;
      unproject_pixel(u + 0.5, v + 0.5, d, intr, rig, view, p.x, p.y, p.z);
      p.u = u;
      p.v = v;
      points.push_back(p);
    }
  }
  return points;
}

void write_ppm(const ColorImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw std::runtime_error("write_ppm: write failed for " + path);
}

void write_depth_raw(const DepthImage& img, double max_range, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_depth_raw: cannot open " + path);
  out.write(reinterpret_cast<const char*>(img.depth.data()),
            static_cast<std::streamsize>(img.depth.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write_depth_raw: write failed for " + path);

  nlohmann::json j;
  j["width"] = img.width;
  j["height"] = img.height;
  j["view"] = img.view;
  j["max_range"] = max_range;
  std::ofstream side(path + ".json");
  if (!side) throw std::runtime_error("write_depth_raw: cannot open sidecar for " + path);
  side << j.dump() << "\n";
}

}  // namespace bevnav
