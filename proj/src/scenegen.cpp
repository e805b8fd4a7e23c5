#include "bevnav/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "bevnav/bev_features.hpp"
#include "bevnav/geodesy.hpp"
#include "bevnav/render.hpp"
#include "bevnav/rng.hpp"

namespace bevnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPlacementTries = 64;

constexpr const char* kRelations[5] = {"behind", "in_front_of", "left_of", "right_of",
                                       "near"};
constexpr double kRelationWeights[5] = {0.35, 0.15, 0.2, 0.2, 0.1};

double support_along(const Obstacle& o, double dx, double dy) {
  if (o.kind == ObstacleKind::Box) {
    return o.half_x * std::abs(dx) + o.half_y * std::abs(dy);
  }
  return o.radius;
}

double footprint_circumradius(const Obstacle& o) {
  return o.kind == ObstacleKind::Box ? std::hypot(o.half_x, o.half_y) : o.radius;
}

bool place_obstacle(Rng& rng, const SceneConfig& cfg, Scene& scene, Obstacle o) {
  const double support = footprint_circumradius(o);
  for (int t = 0; t < kPlacementTries; ++t) {
    const double r_min = cfg.agent_margin + support;
    const double r_max = cfg.grid.bound - 0.5;
    if (r_min >= r_max) return false;
    const double r = rng.uniform(r_min, r_max);
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    o.cx = scene.agent.x + r * std::cos(theta);
    o.cy = scene.agent.y + r * std::sin(theta);

    const double fit = o.kind == ObstacleKind::Box ? std::max(o.half_x, o.half_y) : o.radius;
    if (std::abs(o.cx) + fit > cfg.floor_half_size ||
        std::abs(o.cy) + fit > cfg.floor_half_size) {
      continue;
    }
    bool clear = true;
    for (const Obstacle& other : scene.obstacles) {
      const double d = std::hypot(o.cx - other.cx, o.cy - other.cy);
      if (d < support + footprint_circumradius(other) + cfg.obstacle_gap) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    scene.obstacles.push_back(o);
    return true;
  }
  return false;
}

bool sectors_covered(const Scene& scene, const SceneConfig& cfg) {
  const TravGrid trav = traversability_from_scene(scene, cfg.grid, cfg.agent_radius);
  bool seen[8] = {false};
  int remaining = 8;
  for (int r = 0; r < cfg.grid.rows() && remaining > 0; ++r) {
    for (int c = 0; c < cfg.grid.cols(); ++c) {
      if (!trav.passable(r, c)) continue;
      double x, y;
      cell_center(cfg.grid, r, c, x, y);
      const int k = static_cast<int>(direction_bin(x, y));
      if (!seen[k]) {
        seen[k] = true;
        if (--remaining == 0) break;
      }
    }
  }
  return remaining == 0;
}

}  // namespace

Scene generate_scene(uint64_t seed, const SceneConfig& config) {
  config.grid.validate();
  if (config.box_count < 0 || config.cylinder_count < 0 || config.pedestrian_count < 0) {
    throw std::invalid_argument("generate_scene: obstacle counts must be >= 0");
  }

  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    Scene scene;
    scene.floor_half_size = config.floor_half_size;
    scene.agent = config.agent;
    scene.seed = seed;

    // Unique (color, kind) identity per referent obstacle.
    std::vector<ColorId> box_deck = {ColorId::Red, ColorId::Green, ColorId::Blue,
                                     ColorId::Yellow, ColorId::Gray};
    std::vector<ColorId> cyl_deck = box_deck;
    rng.shuffle(box_deck);
    rng.shuffle(cyl_deck);
    if (config.box_count > static_cast<int>(box_deck.size()) ||
        config.cylinder_count > static_cast<int>(cyl_deck.size())) {
      throw GenerationError("generate_scene: more obstacles than unique referents");
    }

    bool ok = true;
    for (int i = 0; i < config.box_count && ok; ++i) {
      Obstacle o;
      o.kind = ObstacleKind::Box;
      o.color = box_deck[i];
      o.half_x = rng.uniform(config.min_box_half, config.max_box_half);
      o.half_y = rng.uniform(config.min_box_half, config.max_box_half);
      o.height = rng.uniform(config.min_obstacle_height, config.max_obstacle_height);
      ok = place_obstacle(rng, config, scene, o);
    }
    for (int i = 0; i < config.cylinder_count && ok; ++i) {
      Obstacle o;
      o.kind = ObstacleKind::Cylinder;
      o.color = cyl_deck[i];
      o.radius = rng.uniform(config.min_cyl_radius, config.max_cyl_radius);
      o.height = rng.uniform(config.min_obstacle_height, config.max_obstacle_height);
      ok = place_obstacle(rng, config, scene, o);
    }
    for (int i = 0; i < config.pedestrian_count && ok; ++i) {
      Obstacle o;
      o.kind = ObstacleKind::Cylinder;
      o.color = ColorId::Gray;
      o.transient = true;
      o.radius = kPedestrianRadius;
      o.height = kPedestrianHeight;
      ok = place_obstacle(rng, config, scene, o);
    }
    if (!ok) continue;
    if (!sectors_covered(scene, config)) continue;

    validate_scene(scene);
    return scene;
  }
  throw GenerationError("generate_scene: retries exhausted (config too dense)");
}

const std::vector<std::string>& instruction_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (const char* rel : kRelations) v.push_back(rel);
    v.push_back("go_to");
    v.push_back("small");
    v.push_back("big");
    for (int i = 0; i < 8; ++i) v.push_back(direction_name(static_cast<Direction8>(i)));
    for (ColorId c : {ColorId::Red, ColorId::Green, ColorId::Blue, ColorId::Yellow,
                      ColorId::Gray}) {
      v.push_back(color_name(c));
    }
    v.push_back("box");
    v.push_back("cylinder");
    return v;
  }();
  return vocab;
}

namespace {

const Obstacle* find_unique_referent(const Scene& scene, ColorId color, ObstacleKind kind) {
  const Obstacle* found = nullptr;
  for (const Obstacle& o : scene.obstacles) {
    if (o.transient || o.color != color || o.kind != kind) continue;
    if (found) return nullptr;  // ambiguous
    found = &o;
  }
  return found;
}

// Snaps an agent-frame candidate point to a traversable cell center, accepting
// the result only when it stays within `slack` of the candidate.
std::optional<std::pair<double, double>> snap_near(const TravGrid& trav, double ax,
                                                   double ay, double slack) {
  const auto cell = world_to_cell(trav.spec, ax, ay);
  if (!cell) return std::nullopt;
  Cell snapped;
  try {
    snapped = snap_to_traversable(trav, *cell);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  double sx, sy;
  cell_center(trav.spec, snapped.row, snapped.col, sx, sy);
  if (std::hypot(sx - ax, sy - ay) > slack) return std::nullopt;
  return std::make_pair(sx, sy);
}

}  // namespace

std::optional<std::pair<double, double>> resolve_instruction_target(
    const Scene& scene, const std::vector<std::string>& instruction, const GridSpec& grid,
    double agent_radius) {
  if (instruction.size() != 3) return std::nullopt;
  const TravGrid trav = traversability_from_scene(scene, grid, agent_radius);

  if (instruction[0] == "go_to") {
    const auto dir = direction_from_name(instruction[1]);
    if (!dir) return std::nullopt;
    double range;
    if (instruction[2] == "small") {
      range = kDRange / 2.0;
    } else if (instruction[2] == "big") {
      range = 1.5 * kDRange;
    } else {
      return std::nullopt;
    }
    const double theta = static_cast<int>(*dir) * (M_PI / 4.0);
    const double cx = range * std::cos(theta);
    const double cy = range * std::sin(theta);
    // Nearest traversable cell to the sector centroid, kept inside the sector.
    const auto cell = world_to_cell(grid, cx, cy);
    if (!cell) return std::nullopt;
    Cell snapped;
    try {
      snapped = snap_to_traversable(trav, *cell);
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
    double sx, sy;
    cell_center(grid, snapped.row, snapped.col, sx, sy);
    if (direction_bin(sx, sy) != *dir) return std::nullopt;
    return std::make_pair(sx, sy);
  }

  int rel = -1;
  for (int i = 0; i < 5; ++i) {
    if (instruction[0] == kRelations[i]) rel = i;
  }
  if (rel < 0) return std::nullopt;

  ColorId color;
  ObstacleKind kind;
  try {
    color = color_from_name(instruction[1]);
    kind = obstacle_kind_from_name(instruction[2]);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  const Obstacle* ref = find_unique_referent(scene, color, kind);
  if (!ref) return std::nullopt;

  // Geometry in the world frame: u is the agent-to-referent ray direction.
  const double vx = ref->cx - scene.agent.x, vy = ref->cy - scene.agent.y;
  const double len = std::hypot(vx, vy);
  if (len < 1e-6) return std::nullopt;
  const double ux = vx / len, uy = vy / len;

  if (instruction[0] == "near") {
    double ax, ay;
    world_to_agent(scene.agent, ref->cx, ref->cy, ax, ay);
    return snap_near(trav, ax, ay, footprint_circumradius(*ref) + 1.0);
  }

  double dx = 0.0, dy = 0.0;
  if (instruction[0] == "behind") {
    dx = ux;
    dy = uy;
  } else if (instruction[0] == "in_front_of") {
    dx = -ux;
    dy = -uy;
  } else if (instruction[0] == "left_of") {
    dx = -uy;
    dy = ux;
  } else {  // right_of
    dx = uy;
    dy = -ux;
  }

  const double support = support_along(*ref, dx, dy);
  for (const double offset : {0.75, 0.6, 0.9, 0.5, 1.0}) {
    const double wx = ref->cx + dx * (support + offset);
    const double wy = ref->cy + dy * (support + offset);
    double ax, ay;
    world_to_agent(scene.agent, wx, wy, ax, ay);
    const auto hit = snap_near(trav, ax, ay, 0.5);
    if (hit) return hit;
  }
  return std::nullopt;
}

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::OutOfBound: return "out-of-bound";
    case RejectReason::Unresolvable: return "unresolvable";
    case RejectReason::NonTraversable: return "non-traversable";
    case RejectReason::HeightChange: return "height-change";
  }
  return "unresolvable";
}

namespace {

std::vector<std::string> draw_instruction(Rng& rng, const Scene& scene,
                                          const SceneConfig& cfg) {
  std::vector<const Obstacle*> referents;
  for (const Obstacle& o : scene.obstacles) {
    if (!o.transient) referents.push_back(&o);
  }

  if (!referents.empty() && rng.chance(cfg.rel_fraction)) {
    const Obstacle* ref = referents[rng.uniform_int(referents.size())];
    const double roll = rng.uniform();
    double acc = 0.0;
    int rel = 0;
    for (int i = 0; i < 5; ++i) {
      acc += kRelationWeights[i];
      if (roll < acc) {
        rel = i;
        break;
      }
    }
    return {kRelations[rel], color_name(ref->color), obstacle_kind_name(ref->kind)};
  }

  const int dir = static_cast<int>(rng.uniform_int(8));
  const bool big = rng.chance(0.5);
  return {"go_to", direction_name(static_cast<Direction8>(dir)), big ? "big" : "small"};
}

struct DrawnTarget {
  std::vector<std::string> instruction;
  double tx, ty;
};

std::variant<DrawnTarget, RejectReason> draw_and_resolve(uint64_t seed, const Scene& scene,
                                                         const SceneConfig& cfg) {
  Rng rng(seed);
  DrawnTarget out;
  out.instruction = draw_instruction(rng, scene, cfg);
  const auto target = resolve_instruction_target(scene, out.instruction, cfg.grid,
                                                 cfg.agent_radius);
  if (!target) return RejectReason::Unresolvable;
  out.tx = target->first;
  out.ty = target->second;

  switch (admit_sample(out.tx, out.ty, scene, cfg.grid, cfg.agent_radius)) {
    case AdmitResult::Admitted: break;
    case AdmitResult::OutOfBound: return RejectReason::OutOfBound;
    case AdmitResult::NonTraversable: return RejectReason::NonTraversable;
    case AdmitResult::HeightChange: return RejectReason::HeightChange;
  }

  // Pedestrians never sit near a target.
  double wx, wy;
  agent_to_world(scene.agent, out.tx, out.ty, wx, wy);
  for (const Obstacle& o : scene.obstacles) {
    if (!o.transient) continue;
    if (obstacle_footprint_distance(o, wx, wy) < kPedestrianTargetClearance) {
      return RejectReason::Unresolvable;
    }
  }
  return out;
}

Sample finish_sample(const DrawnTarget& drawn, const Scene& scene, const SceneConfig& cfg) {
  Sample s;
  s.instruction = drawn.instruction;
  s.tx = drawn.tx;
  s.ty = drawn.ty;
  const CameraRig rig;
  const CameraIntrinsics intr = intrinsics_from_fov(cfg.resolution, cfg.resolution, 90.0);
  const auto views = render_rig(scene, rig, intr);
  s.occluded = occlusion_test(s.tx, s.ty, views, rig, intr);
  s.dir = direction_bin(s.tx, s.ty);
  s.range = range_bin(s.tx, s.ty);
  s.stage1_text = stage1_answer(s.dir, s.range);
  return s;
}

}  // namespace

SampleResult generate_sample(uint64_t seed, const Scene& scene, const SceneConfig& config) {
  const auto drawn = draw_and_resolve(seed, scene, config);
  if (std::holds_alternative<RejectReason>(drawn)) {
    return std::get<RejectReason>(drawn);
  }
  return finish_sample(std::get<DrawnTarget>(drawn), scene, config);
}

namespace {

bool place_pedestrians(Rng& rng, const SceneConfig& cfg, Scene& scene, double target_wx,
                       double target_wy) {
  for (int i = 0; i < cfg.pedestrian_count; ++i) {
    Obstacle ped;
    ped.kind = ObstacleKind::Cylinder;
    ped.color = ColorId::Gray;
    ped.transient = true;
    ped.radius = kPedestrianRadius;
    ped.height = kPedestrianHeight;

    bool placed = false;
    for (int t = 0; t < kPlacementTries; ++t) {
      const double r = rng.uniform(cfg.agent_margin + ped.radius, cfg.grid.bound - 0.5);
      const double theta = rng.uniform(0.0, 2.0 * M_PI);
      ped.cx = scene.agent.x + r * std::cos(theta);
      ped.cy = scene.agent.y + r * std::sin(theta);
      if (std::abs(ped.cx) + ped.radius > cfg.floor_half_size ||
          std::abs(ped.cy) + ped.radius > cfg.floor_half_size) {
        continue;
      }
      if (obstacle_footprint_distance(ped, target_wx, target_wy) <
          kPedestrianTargetClearance) {
        continue;
      }
      bool clear = true;
      for (const Obstacle& other : scene.obstacles) {
        const double d = std::hypot(ped.cx - other.cx, ped.cy - other.cy);
        if (d < ped.radius + footprint_circumradius(other) + cfg.obstacle_gap) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      scene.obstacles.push_back(ped);
      placed = true;
      break;
    }
    if (!placed) return false;
  }
  return true;
}

std::string sample_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "smp%06d.json", index);
  return buf;
}

std::string sample_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "smp%06d", index);
  return buf;
}

}  // namespace

std::string sample_to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["scene_file"] = s.scene_file;
  j["instruction"] = s.instruction;
  j["target"] = {s.tx, s.ty};
  j["occluded"] = s.occluded;
  j["split"] = s.split == Split::Train ? "train" : "val";
  j["dir"] = direction_name(s.dir);
  j["range"] = s.range == RangeBin::Small ? "small" : "big";
  j["stage1_text"] = s.stage1_text;
  return j.dump();
}

Sample sample_from_json(const std::string& line) {
  const json j = json::parse(line);
  Sample s;
  s.id = j.at("id").get<std::string>();
  s.scene_file = j.at("scene_file").get<std::string>();
  s.instruction = j.at("instruction").get<std::vector<std::string>>();
  s.tx = j.at("target").at(0).get<double>();
  s.ty = j.at("target").at(1).get<double>();
  s.occluded = j.at("occluded").get<bool>();
  const std::string split = j.at("split").get<std::string>();
  if (split == "train") {
    s.split = Split::Train;
  } else if (split == "val") {
    s.split = Split::Val;
  } else {
    throw std::runtime_error("sample_from_json: bad split " + split);
  }
  const auto dir = direction_from_name(j.at("dir").get<std::string>());
  if (!dir) throw std::runtime_error("sample_from_json: bad dir");
  s.dir = *dir;
  s.range = j.at("range").get<std::string>() == "small" ? RangeBin::Small : RangeBin::Big;
  s.stage1_text = j.at("stage1_text").get<std::string>();
  return s;
}

std::vector<ManifestRecord> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back({sample_from_json(line)});
  }
  return records;
}

ManifestSummary generate_dataset(const DatasetConfig& config, int count, uint64_t seed,
                                 const std::string& manifest_path) {
  if (count <= 0) throw std::invalid_argument("generate_dataset: count must be > 0");

  const fs::path manifest(manifest_path);
  const fs::path dir = manifest.parent_path().empty() ? fs::path(".") : manifest.parent_path();
  const fs::path tmp = manifest_path + ".tmp";

  // Open the manifest first: an unwritable path fails before any scene file
  // touches disk, and the temp-then-rename keeps partial output invisible.
  std::ofstream out(tmp);
  if (!out) throw std::runtime_error("generate_dataset: cannot write " + manifest_path);
  const fs::path scenes_dir = dir / "scenes";
  std::error_code ec;
  fs::create_directories(scenes_dir, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("generate_dataset: cannot create " + scenes_dir.string());
  }

  const int min_occ = std::max(
      0, static_cast<int>(std::ceil((config.occluded_target - config.occluded_tol) * count)));
  const int max_occ = std::min(
      count,
      static_cast<int>(std::floor((config.occluded_target + config.occluded_tol) * count)));

  SceneConfig scene_cfg = config.scene;
  const int pedestrians = scene_cfg.pedestrian_count;
  scene_cfg.pedestrian_count = 0;  // placed per sample, kept clear of the target

  ManifestSummary summary;
  summary.count = count;
  int n_occ = 0;

  for (int i = 0; i < count; ++i) {
    const Split split =
        (std::floor((i + 1) * config.val_fraction) > std::floor(i * config.val_fraction))
            ? Split::Val
            : Split::Train;

    bool have_fallback = false;
    Scene fallback_scene;
    Sample fallback_sample;
    bool accepted = false;
    Scene accepted_scene;
    Sample accepted_sample;

    for (int a = 0; a < config.max_attempts_per_sample && !accepted; ++a) {
      const uint64_t s = mix_seed(mix_seed(seed, 1000003ULL + i), a);
      Scene scene = generate_scene(s, scene_cfg);
      const auto drawn = draw_and_resolve(mix_seed(s, 1), scene, scene_cfg);
      if (std::holds_alternative<RejectReason>(drawn)) continue;
      const DrawnTarget& dt = std::get<DrawnTarget>(drawn);

      SceneConfig full_cfg = scene_cfg;
      full_cfg.pedestrian_count = pedestrians;
      double wx, wy;
      agent_to_world(scene.agent, dt.tx, dt.ty, wx, wy);
      Rng ped_rng(mix_seed(s, 2));
      if (!place_pedestrians(ped_rng, full_cfg, scene, wx, wy)) continue;

      Sample sample = finish_sample(dt, scene, full_cfg);
      if (!have_fallback) {
        have_fallback = true;
        fallback_scene = scene;
        fallback_sample = sample;
      }

      const int o = sample.occluded ? 1 : 0;
      const int remaining = count - i - 1;
      if (n_occ + o > max_occ) continue;
      if (n_occ + o + remaining < min_occ) continue;
      accepted = true;
      accepted_scene = scene;
      accepted_sample = sample;
    }

    if (!accepted) {
      if (!have_fallback) {
        fs::remove(tmp);
        throw GenerationError("generate_dataset: no valid sample for slot " +
                              std::to_string(i));
      }
      accepted_scene = fallback_scene;
      accepted_sample = fallback_sample;
    }

    accepted_sample.id = sample_id(i);
    accepted_sample.scene_file = "scenes/" + sample_file_name(i);
    accepted_sample.split = split;
    save_scene(accepted_scene, (scenes_dir / sample_file_name(i)).string());

    out << sample_to_json(accepted_sample) << "\n";
    if (!out) {
      fs::remove(tmp);
      throw std::runtime_error("generate_dataset: write failed for " + manifest_path);
    }
    n_occ += accepted_sample.occluded ? 1 : 0;
    if (split == Split::Train) {
      ++summary.train_count;
    } else {
      ++summary.val_count;
    }
  }

  out.close();
  fs::rename(tmp, manifest, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("generate_dataset: cannot finalize " + manifest_path);
  }

  summary.occluded_count = n_occ;
  summary.occluded_fraction = static_cast<double>(n_occ) / count;
  summary.occlusion_target_met = n_occ >= min_occ && n_occ <= max_occ;
  if (!summary.occlusion_target_met) {
    summary.warning = "occluded fraction " + std::to_string(summary.occluded_fraction) +
                      " outside target band after bounded resampling";
    if (config.strict_occlusion) throw GenerationError("generate_dataset: " + summary.warning);
  }
  return summary;
}

}  // namespace bevnav
