#include "bevnav/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bevnav {

using nlohmann::json;

void RunConfig::sync() {
  model.grid = grid;
  model.image_size = resolution;
  if (model.vocab.empty()) model.vocab = instruction_vocabulary();
  dataset.scene.grid = grid;
  dataset.scene.resolution = resolution;
  dataset.scene.agent_radius = model.agent_radius;
}

RunConfig default_run_config() {
  RunConfig c;
  c.sync();
  return c;
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& slot) {
  if (j.contains(key)) slot = j.at(key).get<T>();
}

void apply_scene(const json& j, SceneConfig& s) {
  maybe(j, "floor_half_size", s.floor_half_size);
  maybe(j, "box_count", s.box_count);
  maybe(j, "cylinder_count", s.cylinder_count);
  maybe(j, "pedestrian_count", s.pedestrian_count);
  maybe(j, "min_obstacle_height", s.min_obstacle_height);
  maybe(j, "max_obstacle_height", s.max_obstacle_height);
  maybe(j, "min_box_half", s.min_box_half);
  maybe(j, "max_box_half", s.max_box_half);
  maybe(j, "min_cyl_radius", s.min_cyl_radius);
  maybe(j, "max_cyl_radius", s.max_cyl_radius);
  maybe(j, "agent_margin", s.agent_margin);
  maybe(j, "obstacle_gap", s.obstacle_gap);
  maybe(j, "max_retries", s.max_retries);
  maybe(j, "rel_fraction", s.rel_fraction);
}

void apply_dataset(const json& j, DatasetConfig& d) {
  maybe(j, "occluded_target", d.occluded_target);
  maybe(j, "occluded_tol", d.occluded_tol);
  maybe(j, "val_fraction", d.val_fraction);
  maybe(j, "max_attempts_per_sample", d.max_attempts_per_sample);
  maybe(j, "strict_occlusion", d.strict_occlusion);
  if (j.contains("scene")) apply_scene(j.at("scene"), d.scene);
}

void apply_model(const json& j, ModelConfig& m) {
  maybe(j, "patch", m.patch);
  maybe(j, "token_dim", m.token_dim);
  maybe(j, "nav_dim", m.nav_dim);
  maybe(j, "bev_width", m.bev_width);
  maybe(j, "geom_channels", m.geom_channels);
  maybe(j, "gate_hidden", m.gate_hidden);
  maybe(j, "nav_seed", m.nav_seed);
  maybe(j, "nav_seed_channels", m.nav_seed_channels);
  maybe(j, "nav_up_channels", m.nav_up_channels);
  maybe(j, "dec_hidden1", m.dec_hidden1);
  maybe(j, "dec_hidden2", m.dec_hidden2);
  maybe(j, "height_bins", m.height_bins);
  maybe(j, "d_range", m.d_range);
  maybe(j, "positive_weight", m.positive_weight);
  maybe(j, "agent_radius", m.agent_radius);
  maybe(j, "region_radius", m.region_radius);
}

void apply_schedule(const json& j, TrainSchedule& t) {
  maybe(j, "stage_a_epochs", t.stage_a_epochs);
  maybe(j, "stage_b_epochs", t.stage_b_epochs);
  maybe(j, "stage_a_steps", t.stage_a_steps);
  maybe(j, "stage_b_steps", t.stage_b_steps);
  maybe(j, "lr_a", t.lr_a);
  maybe(j, "lr_b", t.lr_b);
  maybe(j, "momentum", t.momentum);
  maybe(j, "bev_lr_multiplier", t.bev_lr_multiplier);
  maybe(j, "batch_size", t.batch_size);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  RunConfig c = default_run_config();
  if (path.empty()) return c;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_run_config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str());

  maybe(j, "seed", c.seed);
  maybe(j, "threads", c.threads);
  maybe(j, "resolution", c.resolution);
  if (j.contains("grid")) {
    maybe(j.at("grid"), "bound", c.grid.bound);
    maybe(j.at("grid"), "cell", c.grid.cell);
  }
  if (j.contains("dataset")) apply_dataset(j.at("dataset"), c.dataset);
  if (j.contains("model")) apply_model(j.at("model"), c.model);
  if (j.contains("schedule")) apply_schedule(j.at("schedule"), c.schedule);
  c.sync();
  c.grid.validate();
  return c;
}

std::string run_config_to_json_text(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["resolution"] = c.resolution;
  j["grid"] = {{"bound", c.grid.bound}, {"cell", c.grid.cell}};
  j["dataset"] = {{"occluded_target", c.dataset.occluded_target},
                  {"occluded_tol", c.dataset.occluded_tol},
                  {"val_fraction", c.dataset.val_fraction},
                  {"max_attempts_per_sample", c.dataset.max_attempts_per_sample},
                  {"strict_occlusion", c.dataset.strict_occlusion},
                  {"scene",
                   {{"floor_half_size", c.dataset.scene.floor_half_size},
                    {"box_count", c.dataset.scene.box_count},
                    {"cylinder_count", c.dataset.scene.cylinder_count},
                    {"pedestrian_count", c.dataset.scene.pedestrian_count},
                    {"min_obstacle_height", c.dataset.scene.min_obstacle_height},
                    {"max_obstacle_height", c.dataset.scene.max_obstacle_height},
                    {"min_box_half", c.dataset.scene.min_box_half},
                    {"max_box_half", c.dataset.scene.max_box_half},
                    {"min_cyl_radius", c.dataset.scene.min_cyl_radius},
                    {"max_cyl_radius", c.dataset.scene.max_cyl_radius},
                    {"agent_margin", c.dataset.scene.agent_margin},
                    {"obstacle_gap", c.dataset.scene.obstacle_gap},
                    {"max_retries", c.dataset.scene.max_retries},
                    {"rel_fraction", c.dataset.scene.rel_fraction}}}};
  j["model"] = {{"patch", c.model.patch},
                {"token_dim", c.model.token_dim},
                {"nav_dim", c.model.nav_dim},
                {"bev_width", c.model.bev_width},
                {"geom_channels", c.model.geom_channels},
                {"gate_hidden", c.model.gate_hidden},
                {"nav_seed", c.model.nav_seed},
                {"nav_seed_channels", c.model.nav_seed_channels},
                {"nav_up_channels", c.model.nav_up_channels},
                {"dec_hidden1", c.model.dec_hidden1},
                {"dec_hidden2", c.model.dec_hidden2},
                {"height_bins", c.model.height_bins},
                {"d_range", c.model.d_range},
                {"positive_weight", c.model.positive_weight},
                {"agent_radius", c.model.agent_radius},
                {"region_radius", c.model.region_radius}};
  j["schedule"] = {{"stage_a_epochs", c.schedule.stage_a_epochs},
                   {"stage_b_epochs", c.schedule.stage_b_epochs},
                   {"stage_a_steps", c.schedule.stage_a_steps},
                   {"stage_b_steps", c.schedule.stage_b_steps},
                   {"lr_a", c.schedule.lr_a},
                   {"lr_b", c.schedule.lr_b},
                   {"momentum", c.schedule.momentum},
                   {"bev_lr_multiplier", c.schedule.bev_lr_multiplier},
                   {"batch_size", c.schedule.batch_size}};
  return j.dump(2);
}

}  // namespace bevnav
