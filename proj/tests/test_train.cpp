#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "bevnav/metrics.hpp"
#include "bevnav/model.hpp"
#include "bevnav/rng.hpp"
#include "bevnav/scenegen.hpp"
#include "bevnav/train.hpp"

using namespace bevnav;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.grid.bound = 6.4;
  c.grid.cell = 0.4;
  c.image_size = 32;
  c.vocab = instruction_vocabulary();
  return c;
}

struct ToySet {
  std::vector<Scene> scenes;
  std::vector<Sample> samples;
  std::vector<SampleInput> inputs;
  ModelConfig config;

  SampleLoader loader() const {
    return [this](int i) { return inputs[i]; };
  }
};

ToySet make_toy_set(int n, uint64_t seed) {
  ToySet set;
  set.config = small_config();
  SceneConfig scfg;
  scfg.box_count = 2;
  scfg.cylinder_count = 1;
  scfg.pedestrian_count = 1;
  uint64_t s = seed;
  while (static_cast<int>(set.samples.size()) < n) {
    ++s;
    Scene scene;
    try {
      scene = generate_scene(s, scfg);
    } catch (const GenerationError&) {
      continue;
    }
    const SampleResult res = generate_sample(mix_seed(s, 1), scene, scfg);
    if (!std::holds_alternative<Sample>(res)) continue;
    const Sample& sample = std::get<Sample>(res);
    set.scenes.push_back(scene);
    set.samples.push_back(sample);
    set.inputs.push_back(prepare_sample_input(scene, sample.instruction, sample.tx,
                                              sample.ty, set.config));
  }
  return set;
}

std::vector<float> flatten_params(const ModelParams& p) {
  std::vector<float> all;
  for (const auto& a : p.arrays) all.insert(all.end(), a.data.begin(), a.data.end());
  return all;
}

}  // namespace

TEST_CASE("train: zero learning rate leaves parameters untouched") {
  const ToySet set = make_toy_set(4, 500);
  ModelParams params = init_model(set.config, 1);
  const auto before = flatten_params(params);

  TrainSchedule sched;
  sched.lr_a = 0.0;
  sched.lr_b = 0.0;
  sched.stage_a_steps = 1;
  sched.stage_b_steps = 1;
  train(params, 4, set.loader(), sched);
  CHECK(flatten_params(params) == before);
}

TEST_CASE("train: loss decreases over the first 10 full-batch steps") {
  const ToySet set = make_toy_set(4, 510);
  ModelParams params = init_model(set.config, 2);

  TrainSchedule sched;
  sched.batch_size = 4;  // full batch: every step sees the same data
  sched.stage_a_steps = 1;
  sched.stage_b_steps = 10;
  sched.lr_a = 0.0;
  sched.lr_b = 1e-3;
  sched.seed = 3;
  const auto log = train(params, 4, set.loader(), sched);

  std::vector<double> stage_b;
  for (const auto& e : log) {
    if (e.stage == 2) stage_b.push_back(e.loss);
  }
  REQUIRE(stage_b.size() == 10);
  for (size_t i = 1; i < stage_b.size(); ++i) CHECK(stage_b[i] < stage_b[i - 1]);
}

TEST_CASE("train: identical seeds give bit-identical parameters") {
  const ToySet set = make_toy_set(6, 520);
  TrainSchedule sched;
  sched.stage_a_steps = 4;
  sched.stage_b_steps = 4;
  sched.batch_size = 2;
  sched.seed = 11;

  ModelParams a = init_model(set.config, 3);
  ModelParams b = init_model(set.config, 3);
  const auto log_a = train(a, 6, set.loader(), sched);
  const auto log_b = train(b, 6, set.loader(), sched);
  CHECK(flatten_params(a) == flatten_params(b));
  REQUIRE(log_a.size() == log_b.size());
  for (size_t i = 0; i < log_a.size(); ++i) CHECK(log_a[i].loss == log_b[i].loss);
}

TEST_CASE("train: thread count does not change the result") {
  const ToySet set = make_toy_set(6, 530);
  TrainSchedule sched;
  sched.stage_a_steps = 2;
  sched.stage_b_steps = 3;
  sched.batch_size = 4;
  sched.seed = 12;

  ModelParams a = init_model(set.config, 4);
  ModelParams b = init_model(set.config, 4);
  train(a, 6, set.loader(), sched, StageSelect::Both, 1);
  train(b, 6, set.loader(), sched, StageSelect::Both, 4);
  CHECK(flatten_params(a) == flatten_params(b));
}

TEST_CASE("train: an absurd learning rate raises a divergence error") {
  const ToySet set = make_toy_set(2, 540);
  ModelParams params = init_model(set.config, 5);
  TrainSchedule sched;
  sched.stage_a_steps = 20;
  sched.lr_a = 1e20;
  sched.momentum = 0.0;
  CHECK_THROWS_AS(train(params, 2, set.loader(), sched, StageSelect::StageA),
                  DivergenceError);
}

TEST_CASE("train: empty dataset is rejected") {
  const ToySet set = make_toy_set(1, 550);
  ModelParams params = init_model(set.config, 6);
  TrainSchedule sched;
  CHECK_THROWS_AS(train(params, 0, set.loader(), sched), std::invalid_argument);
}

TEST_CASE("train: overfit on 8 samples puts the argmax inside the region") {
  const ToySet set = make_toy_set(8, 560);
  ModelParams params = init_model(set.config, 7);

  TrainSchedule sched;
  sched.stage_a_steps = 40;
  sched.stage_b_steps = 220;
  sched.batch_size = 4;
  sched.seed = 21;
  const auto log = train(params, 8, set.loader(), sched);

  double last_loss = 0.0;
  for (const auto& e : log) {
    if (e.stage == 2) last_loss = e.loss;
  }
  CHECK(last_loss < 0.1);

  int hits = 0;
  for (int i = 0; i < 8; ++i) {
    const BevMap a = predict_affordance(params, set.inputs[i]);
    const ArgmaxResult am = argmax_target(a);
    const int idx = am.cell.row * set.config.grid.cols() + am.cell.col;
    if (set.inputs[i].region_mask[idx] > 0.0f) ++hits;
  }
  CHECK(hits >= 7);
}

TEST_CASE("loss csv writer emits the documented columns") {
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "loss_rt.csv").string();
  write_loss_csv({{0, 1, 0.5}, {1, 2, 0.25}}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,stage,loss");
  std::getline(in, line);
  CHECK(line == "0,1,0.5");
  fs::remove(path);
}
