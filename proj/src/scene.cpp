#include "bevnav/scene.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bevnav {

using nlohmann::json;

const char* obstacle_kind_name(ObstacleKind k) {
  return k == ObstacleKind::Box ? "box" : "cylinder";
}

const char* color_name(ColorId c) {
  switch (c) {
    case ColorId::Red: return "red";
    case ColorId::Green: return "green";
    case ColorId::Blue: return "blue";
    case ColorId::Yellow: return "yellow";
    case ColorId::Gray: return "gray";
  }
  return "gray";
}

ObstacleKind obstacle_kind_from_name(const std::string& s) {
  if (s == "box") return ObstacleKind::Box;
  if (s == "cylinder") return ObstacleKind::Cylinder;
  throw std::invalid_argument("unknown obstacle kind: " + s);
}

ColorId color_from_name(const std::string& s) {
  if (s == "red") return ColorId::Red;
  if (s == "green") return ColorId::Green;
  if (s == "blue") return ColorId::Blue;
  if (s == "yellow") return ColorId::Yellow;
  if (s == "gray") return ColorId::Gray;
  throw std::invalid_argument("unknown color: " + s);
}

bool obstacle_contains(const Obstacle& o, double wx, double wy) {
  if (o.kind == ObstacleKind::Box) {
    return std::abs(wx - o.cx) <= o.half_x && std::abs(wy - o.cy) <= o.half_y;
  }
  const double dx = wx - o.cx, dy = wy - o.cy;
  return dx * dx + dy * dy <= o.radius * o.radius;
}

double obstacle_footprint_distance(const Obstacle& o, double wx, double wy) {
  if (o.kind == ObstacleKind::Box) {
    const double dx = std::max(std::abs(wx - o.cx) - o.half_x, 0.0);
    const double dy = std::max(std::abs(wy - o.cy) - o.half_y, 0.0);
    return std::hypot(dx, dy);
  }
  const double d = std::hypot(wx - o.cx, wy - o.cy) - o.radius;
  return std::max(d, 0.0);
}

double scene_height_at(const Scene&, double, double) {
  return 0.0;  // flat floor
}

void validate_scene(const Scene& scene) {
  if (!(scene.floor_half_size > 0.0)) {
    throw std::invalid_argument("scene: floor_half_size must be positive");
  }
  std::set<std::pair<int, int>> referents;
  for (const Obstacle& o : scene.obstacles) {
    if (!(o.height > 0.0)) throw std::invalid_argument("scene: obstacle height must be positive");
    if (o.kind == ObstacleKind::Box && !(o.half_x > 0.0 && o.half_y > 0.0)) {
      throw std::invalid_argument("scene: box extents must be positive");
    }
    if (o.kind == ObstacleKind::Cylinder && !(o.radius > 0.0)) {
      throw std::invalid_argument("scene: cylinder radius must be positive");
    }
    if (o.transient && o.kind != ObstacleKind::Cylinder) {
      throw std::invalid_argument("scene: transient obstacles must be cylinders");
    }
    if (obstacle_contains(o, scene.agent.x, scene.agent.y)) {
      throw std::invalid_argument("scene: agent inside an obstacle footprint");
    }
    if (!o.transient) {
      auto key = std::make_pair(static_cast<int>(o.color), static_cast<int>(o.kind));
      if (!referents.insert(key).second) {
        throw std::invalid_argument("scene: duplicate (color, kind) referent");
      }
    }
  }
}

static json obstacle_to_json(const Obstacle& o) {
  json j;
  j["kind"] = obstacle_kind_name(o.kind);
  j["center"] = {o.cx, o.cy};
  if (o.kind == ObstacleKind::Box) {
    j["extent"] = {o.half_x, o.half_y};
  } else {
    j["extent"] = o.radius;
  }
  j["height"] = o.height;
  j["color"] = color_name(o.color);
  j["transient"] = o.transient;
  return j;
}

static Obstacle obstacle_from_json(const json& j) {
  Obstacle o;
  o.kind = obstacle_kind_from_name(j.at("kind").get<std::string>());
  o.cx = j.at("center").at(0).get<double>();
  o.cy = j.at("center").at(1).get<double>();
  if (o.kind == ObstacleKind::Box) {
    o.half_x = j.at("extent").at(0).get<double>();
    o.half_y = j.at("extent").at(1).get<double>();
  } else {
    o.radius = j.at("extent").get<double>();
  }
  o.height = j.at("height").get<double>();
  o.color = color_from_name(j.at("color").get<std::string>());
  o.transient = j.at("transient").get<bool>();
  return o;
}

std::string scene_to_json(const Scene& scene) {
  json j;
  j["floor_half_size"] = scene.floor_half_size;
  j["agent_pose"] = {scene.agent.x, scene.agent.y, scene.agent.yaw};
  j["seed"] = scene.seed;
  json obs = json::array();
  for (const Obstacle& o : scene.obstacles) obs.push_back(obstacle_to_json(o));
  j["obstacles"] = obs;
  return j.dump();
}

Scene scene_from_json(const std::string& text) {
  json j = json::parse(text);
  Scene scene;
  scene.floor_half_size = j.at("floor_half_size").get<double>();
  scene.agent.x = j.at("agent_pose").at(0).get<double>();
  scene.agent.y = j.at("agent_pose").at(1).get<double>();
  scene.agent.yaw = j.at("agent_pose").at(2).get<double>();
  if (j.contains("seed")) scene.seed = j.at("seed").get<uint64_t>();
  for (const json& jo : j.at("obstacles")) scene.obstacles.push_back(obstacle_from_json(jo));
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scene: cannot open " + path);
  out << scene_to_json(scene) << "\n";
  if (!out) throw std::runtime_error("save_scene: write failed for " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scene: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

}  // namespace bevnav
