#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"

#include "bevnav/geodesy.hpp"
#include "bevnav/scenegen.hpp"

using namespace bevnav;
namespace fs = std::filesystem;

TEST_CASE("generate_scene is deterministic for a fixed seed") {
  SceneConfig cfg;
  const Scene a = generate_scene(7, cfg);
  const Scene b = generate_scene(7, cfg);
  CHECK(scene_to_json(a) == scene_to_json(b));
  const Scene c = generate_scene(8, cfg);
  CHECK(scene_to_json(a) != scene_to_json(c));
}

TEST_CASE("generate_scene with zero obstacles") {
  SceneConfig cfg;
  cfg.box_count = 0;
  cfg.cylinder_count = 0;
  cfg.pedestrian_count = 0;
  const Scene s = generate_scene(3, cfg);
  CHECK(s.obstacles.empty());
  CHECK(s.agent.x == cfg.agent.x);
  CHECK(s.agent.y == cfg.agent.y);
}

TEST_CASE("over-dense config exhausts retries") {
  SceneConfig cfg;
  cfg.floor_half_size = 1.5;
  cfg.box_count = 5;
  cfg.cylinder_count = 5;
  cfg.min_box_half = 0.8;
  cfg.max_box_half = 0.9;
  cfg.max_retries = 8;
  CHECK_THROWS_AS(generate_scene(1, cfg), GenerationError);
}

TEST_CASE("generated scenes satisfy their invariants") {
  SceneConfig cfg;
  cfg.box_count = 3;
  cfg.cylinder_count = 2;
  cfg.pedestrian_count = 2;
  for (uint64_t seed = 0; seed < 8; ++seed) {
    const Scene s = generate_scene(seed, cfg);
    CHECK_NOTHROW(validate_scene(s));
    std::set<std::pair<int, int>> ids;
    for (const Obstacle& o : s.obstacles) {
      if (o.transient) {
        CHECK(o.kind == ObstacleKind::Cylinder);
        continue;
      }
      ids.insert({static_cast<int>(o.color), static_cast<int>(o.kind)});
    }
    CHECK(ids.size() == 5);  // 3 boxes + 2 cylinders, all unique
  }
}

TEST_CASE("resolve: ego small step lands near the sector centroid") {
  SceneConfig cfg;
  Scene scene;
  scene.floor_half_size = 8.0;
  const auto target =
      resolve_instruction_target(scene, {"go_to", "Front", "small"}, cfg.grid);
  REQUIRE(target.has_value());
  CHECK(std::hypot(target->first - 1.2, target->second) < 0.15);

  const auto big = resolve_instruction_target(scene, {"go_to", "Left", "big"}, cfg.grid);
  REQUIRE(big.has_value());
  CHECK(std::hypot(big->first, big->second - 3.6) < 0.15);
}

TEST_CASE("resolve: missing referent is unresolvable") {
  SceneConfig cfg;
  Scene scene;
  scene.floor_half_size = 8.0;
  CHECK_FALSE(resolve_instruction_target(scene, {"behind", "red", "box"}, cfg.grid));
}

TEST_CASE("resolve: behind a box lands on the far side") {
  SceneConfig cfg;
  Scene scene;
  scene.floor_half_size = 8.0;
  Obstacle box;
  box.kind = ObstacleKind::Box;
  box.cx = 2.0;
  box.cy = 0.0;
  box.half_x = 0.4;
  box.half_y = 0.4;
  box.height = 1.8;
  box.color = ColorId::Red;
  scene.obstacles.push_back(box);

  const auto target = resolve_instruction_target(scene, {"behind", "red", "box"}, cfg.grid);
  REQUIRE(target.has_value());
  CHECK(target->first > 2.4);
  CHECK(std::abs(target->second) <= 0.5);

  const auto front =
      resolve_instruction_target(scene, {"in_front_of", "red", "box"}, cfg.grid);
  REQUIRE(front.has_value());
  CHECK(front->first < 1.6);
  CHECK(front->first > 0.0);

  const auto left = resolve_instruction_target(scene, {"left_of", "red", "box"}, cfg.grid);
  REQUIRE(left.has_value());
  CHECK(left->second > 0.4);  // agent-left of the referent
  CHECK(std::abs(left->first - 2.0) < 0.6);
}

TEST_CASE("resolve: resolved targets are traversable cell centers") {
  SceneConfig cfg;
  const Scene scene = generate_scene(21, cfg);
  const TravGrid trav = traversability_from_scene(scene, cfg.grid, cfg.agent_radius);
  for (const Obstacle& o : scene.obstacles) {
    if (o.transient) continue;
    const std::vector<std::string> instruction = {"behind", color_name(o.color),
                                                  obstacle_kind_name(o.kind)};
    const auto target = resolve_instruction_target(scene, instruction, cfg.grid);
    if (!target) continue;
    const auto cell = world_to_cell(cfg.grid, target->first, target->second);
    REQUIRE(cell.has_value());
    CHECK(trav.passable(cell->row, cell->col));
    double cx, cy;
    cell_center(cfg.grid, cell->row, cell->col, cx, cy);
    CHECK(cx == doctest::Approx(target->first));
    CHECK(cy == doctest::Approx(target->second));
  }
}

TEST_CASE("generate_sample is deterministic and well-labelled") {
  SceneConfig cfg;
  const Scene scene = generate_scene(40, cfg);
  const SampleResult a = generate_sample(11, scene, cfg);
  const SampleResult b = generate_sample(11, scene, cfg);
  REQUIRE(std::holds_alternative<Sample>(a) == std::holds_alternative<Sample>(b));
  if (std::holds_alternative<Sample>(a)) {
    const Sample& sa = std::get<Sample>(a);
    const Sample& sb = std::get<Sample>(b);
    CHECK(sa.instruction == sb.instruction);
    CHECK(sa.tx == sb.tx);
    CHECK(sa.ty == sb.ty);
    CHECK(sa.occluded == sb.occluded);
    CHECK(sa.dir == direction_bin(sa.tx, sa.ty));
    CHECK(sa.range == range_bin(sa.tx, sa.ty));
    CHECK(sa.stage1_text == stage1_answer(sa.dir, sa.range));
  }
}

TEST_CASE("generate_sample flags a fully walled target as occluded") {
  SceneConfig cfg;
  Scene scene;
  scene.floor_half_size = 8.0;
  Obstacle wall;
  wall.kind = ObstacleKind::Box;
  wall.cx = 2.0;
  wall.cy = 0.0;
  wall.half_x = 0.3;
  wall.half_y = 3.5;
  wall.height = 2.2;
  wall.color = ColorId::Red;
  scene.obstacles.push_back(wall);

  // Drive the sampler until it draws "behind red box"; determinism makes the
  // found seed stable.
  bool found = false;
  for (uint64_t seed = 0; seed < 200 && !found; ++seed) {
    const SampleResult res = generate_sample(seed, scene, cfg);
    if (!std::holds_alternative<Sample>(res)) continue;
    const Sample& s = std::get<Sample>(res);
    if (s.instruction[0] == "behind") {
      CHECK(s.occluded);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("manifest record round trips through json") {
  Sample s;
  s.id = "smp000004";
  s.scene_file = "scenes/smp000004.json";
  s.instruction = {"go_to", "Back", "big"};
  s.tx = -3.55;
  s.ty = 0.05;
  s.occluded = false;
  s.split = Split::Val;
  s.dir = Direction8::Back;
  s.range = RangeBin::Big;
  s.stage1_text = stage1_answer(s.dir, s.range);

  const Sample back = sample_from_json(sample_to_json(s));
  CHECK(back.id == s.id);
  CHECK(back.instruction == s.instruction);
  CHECK(back.tx == s.tx);
  CHECK(back.split == Split::Val);
  CHECK(back.stage1_text == s.stage1_text);
}

TEST_CASE("generate_dataset writes a manifest with the requested shape") {
  DatasetConfig cfg;
  cfg.scene.box_count = 2;
  cfg.scene.cylinder_count = 1;
  cfg.scene.pedestrian_count = 1;
  const fs::path dir = fs::temp_directory_path() / "bevnav_ds_small";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string manifest = (dir / "manifest.jsonl").string();

  const ManifestSummary summary = generate_dataset(cfg, 12, 5, manifest);
  CHECK(summary.count == 12);
  CHECK(summary.train_count + summary.val_count == 12);
  CHECK(summary.val_count == 2);  // floor(12 * 0.2)

  const auto records = load_manifest(manifest);
  REQUIRE(records.size() == 12);
  for (const auto& rec : records) {
    const Sample& s = rec.sample;
    CHECK(fs::exists(dir / s.scene_file));
    CHECK(std::abs(s.tx) < 6.4);
    CHECK(std::abs(s.ty) < 6.4);
    const Scene scene = load_scene((dir / s.scene_file).string());
    const TravGrid trav = traversability_from_scene(scene, cfg.scene.grid,
                                                    cfg.scene.agent_radius);
    const auto cell = world_to_cell(cfg.scene.grid, s.tx, s.ty);
    REQUIRE(cell.has_value());
    CHECK(trav.passable(cell->row, cell->col));
    // Pedestrians keep their distance from the target.
    double wx, wy;
    agent_to_world(scene.agent, s.tx, s.ty, wx, wy);
    for (const Obstacle& o : scene.obstacles) {
      if (o.transient) {
        CHECK(obstacle_footprint_distance(o, wx, wy) >= kPedestrianTargetClearance);
      }
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("generate_dataset: count=1 emits exactly one record") {
  DatasetConfig cfg;
  cfg.scene.pedestrian_count = 0;
  const fs::path dir = fs::temp_directory_path() / "bevnav_ds_one";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string manifest = (dir / "m.jsonl").string();
  const ManifestSummary summary = generate_dataset(cfg, 1, 17, manifest);
  CHECK(summary.count == 1);
  CHECK(load_manifest(manifest).size() == 1);
  fs::remove_all(dir);
}

TEST_CASE("generate_dataset: unwritable path fails without partial output") {
  DatasetConfig cfg;
  const std::string manifest = "/nonexistent-bevnav-dir/m.jsonl";
  CHECK_THROWS(generate_dataset(cfg, 2, 1, manifest));
  CHECK_FALSE(fs::exists(manifest));
  CHECK_FALSE(fs::exists("/nonexistent-bevnav-dir"));
}

TEST_CASE("generate_dataset steers the occluded fraction into the band") {
  DatasetConfig cfg;
  cfg.scene.box_count = 3;
  cfg.scene.cylinder_count = 1;
  cfg.scene.pedestrian_count = 2;
  cfg.occluded_target = 0.35;
  cfg.occluded_tol = 0.10;
  const fs::path dir = fs::temp_directory_path() / "bevnav_ds_band";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string manifest = (dir / "manifest.jsonl").string();

  const ManifestSummary summary = generate_dataset(cfg, 100, 7, manifest);
  CHECK(summary.occluded_fraction >= 0.25);
  CHECK(summary.occluded_fraction <= 0.45);
  CHECK(summary.occlusion_target_met);
  fs::remove_all(dir);
}

TEST_CASE("generate_dataset manifests are byte-identical across runs") {
  DatasetConfig cfg;
  cfg.scene.box_count = 2;
  cfg.scene.pedestrian_count = 1;
  const fs::path dir_a = fs::temp_directory_path() / "bevnav_ds_det_a";
  const fs::path dir_b = fs::temp_directory_path() / "bevnav_ds_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::create_directories(dir_a);
  fs::create_directories(dir_b);

  generate_dataset(cfg, 6, 99, (dir_a / "m.jsonl").string());
  generate_dataset(cfg, 6, 99, (dir_b / "m.jsonl").string());

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  CHECK(slurp(dir_a / "m.jsonl") == slurp(dir_b / "m.jsonl"));
  for (int i = 0; i < 6; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "smp%06d.json", i);
    CHECK(slurp(dir_a / "scenes" / name) == slurp(dir_b / "scenes" / name));
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}
