#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace bevnav {

enum class ObstacleKind { Box, Cylinder };
enum class ColorId { Red, Green, Blue, Yellow, Gray };

const char* obstacle_kind_name(ObstacleKind k);
const char* color_name(ColorId c);
ObstacleKind obstacle_kind_from_name(const std::string& s);
ColorId color_from_name(const std::string& s);

// Static scene primitive sitting on the floor (z = 0). Boxes are axis-aligned
// in the world frame. Transient obstacles are pedestrian stand-ins and are
// always cylinders.
struct Obstacle {
  ObstacleKind kind = ObstacleKind::Box;
  double cx = 0.0, cy = 0.0;      // footprint center, world frame (m)
  double half_x = 0.0, half_y = 0.0;  // box half extents (m)
  double radius = 0.0;            // cylinder radius (m)
  double height = 1.0;            // m
  ColorId color = ColorId::Gray;
  bool transient = false;
};

struct Pose2 {
  double x = 0.0, y = 0.0, yaw = 0.0;  // radians
};

struct Scene {
  double floor_half_size = 8.0;  // m
  Pose2 agent;
  std::vector<Obstacle> obstacles;
  uint64_t seed = 0;
};

inline void agent_to_world(const Pose2& agent, double ax, double ay, double& wx, double& wy) {
  const double c = std::cos(agent.yaw), s = std::sin(agent.yaw);
  wx = agent.x + c * ax - s * ay;
  wy = agent.y + s * ax + c * ay;
}

inline void world_to_agent(const Pose2& agent, double wx, double wy, double& ax, double& ay) {
  const double c = std::cos(agent.yaw), s = std::sin(agent.yaw);
  const double dx = wx - agent.x, dy = wy - agent.y;
  ax = c * dx + s * dy;
  ay = -s * dx + c * dy;
}

/// True if world-frame point lies inside the obstacle footprint (inclusive).
bool obstacle_contains(const Obstacle& o, double wx, double wy);

/// Euclidean distance from a world-frame point to the obstacle footprint
/// (0 inside).
double obstacle_footprint_distance(const Obstacle& o, double wx, double wy);

/// Floor height at a world-frame point. Flat synthetic floors return 0.
double scene_height_at(const Scene& scene, double wx, double wy);

/// Checks scene invariants: positive extents, transient implies cylinder,
/// agent outside every footprint, unique (color, kind) among non-transient
/// obstacles. Throws std::invalid_argument on violation.
void validate_scene(const Scene& scene);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace bevnav
