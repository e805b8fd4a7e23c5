#include "bevnav/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "bevnav/rng.hpp"

namespace bevnav {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace {

struct StageRun {
  int stage;  // 1 or 2
  double lr;
  int steps;
};

int steps_for(int requested_steps, int epochs, int num_samples, int batch_size) {
  if (requested_steps > 0) return requested_steps;
  const int per_epoch = (num_samples + batch_size - 1) / batch_size;
  return epochs * per_epoch;
}

}  // namespace

std::vector<TrainLogEntry> train(ModelParams& params, int num_samples,
                                 const SampleLoader& loader, const TrainSchedule& schedule,
                                 StageSelect stages, int threads) {
  if (num_samples <= 0) throw std::invalid_argument("train: empty dataset");
  const int batch = std::max(1, std::min(schedule.batch_size, num_samples));

  std::vector<StageRun> runs;
  if (stages != StageSelect::StageB) {
    runs.push_back({1, schedule.lr_a,
                    steps_for(schedule.stage_a_steps, schedule.stage_a_epochs, num_samples,
                              batch)});
  }
  if (stages != StageSelect::StageA) {
    runs.push_back({2, schedule.lr_b,
                    steps_for(schedule.stage_b_steps, schedule.stage_b_epochs, num_samples,
                              batch)});
  }

  std::vector<TrainLogEntry> log;
  int global_step = 0;

  for (const StageRun& run : runs) {
    // Fresh optimizer state per stage.
    std::vector<std::vector<float>> velocity(params.arrays.size());
    for (size_t i = 0; i < params.arrays.size(); ++i) {
      velocity[i].assign(params.arrays[i].size(), 0.0f);
    }

    Rng shuffle_rng(mix_seed(schedule.seed, static_cast<uint64_t>(run.stage)));
    std::vector<int> order(num_samples);
    for (int i = 0; i < num_samples; ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    size_t cursor = 0;

    ForwardOptions options;
    options.need_affordance = run.stage == 2;

    for (int step = 0; step < run.steps; ++step) {
      std::vector<int> batch_idx(batch);
      for (int b = 0; b < batch; ++b) {
        if (cursor == order.size()) {
          shuffle_rng.shuffle(order);
          cursor = 0;
        }
        batch_idx[b] = order[cursor++];
      }

      // Per-sample gradients land in separate buffers and accumulate in batch
      // index order, so the result is independent of the thread count.
      std::vector<std::vector<std::vector<float>>> grads(
          batch, std::vector<std::vector<float>>(params.arrays.size()));
      std::vector<double> losses(batch, 0.0);
      parallel_for(batch, threads, [&](int b) {
        const SampleInput input = loader(batch_idx[b]);
        const ForwardPass<float> fwd = build_forward<float>(params, input, options);
        const Tensor<float> loss = run.stage == 1
                                       ? stage1_aux_loss(fwd, input)
                                       : region_loss(fwd, input, params.config);
        loss.backward();
        losses[b] = loss.item();
        for (size_t i = 0; i < params.arrays.size(); ++i) {
          grads[b][i] = fwd.leaves[i].grad();
        }
      });

      double loss_sum = 0.0;
      for (double l : losses) loss_sum += l;
      const double mean_loss = loss_sum / batch;
      if (!std::isfinite(mean_loss)) {
        throw DivergenceError("train: non-finite loss at step " +
                              std::to_string(global_step));
      }

      const float inv_batch = 1.0f / static_cast<float>(batch);
      for (size_t i = 0; i < params.arrays.size(); ++i) {
        ParamArray& arr = params.arrays[i];
        const double lr_scale =
            run.stage == 2 && arr.lr_scale != 1.0 ? schedule.bev_lr_multiplier : 1.0;
        const float lr = static_cast<float>(run.lr * lr_scale);
        const float mu = static_cast<float>(schedule.momentum);
        std::vector<float>& vel = velocity[i];
        for (size_t k = 0; k < arr.data.size(); ++k) {
          float g = 0.0f;
          for (int b = 0; b < batch; ++b) g += grads[b][i][k];
          g *= inv_batch;
          vel[k] = mu * vel[k] - lr * g;
          arr.data[k] += vel[k];
        }
      }

      log.push_back({global_step, run.stage, mean_loss});
      ++global_step;
    }
    params.stage = run.stage;
  }
  return log;
}

void write_loss_csv(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_loss_csv: cannot open " + path);
  out << "step,stage,loss\n";
  for (const TrainLogEntry& e : log) {
    out << e.step << "," << e.stage << "," << e.loss << "\n";
  }
  if (!out) throw std::runtime_error("write_loss_csv: write failed for " + path);
}

namespace {

double combined_loss(const ModelParams& params, const SampleInput& input,
                     const std::vector<std::vector<double>>& values) {
  ForwardOptions options;
  options.with_gradients = false;
  const ForwardPass<double> fwd = build_forward<double>(params, input, options, &values);
  return region_loss(fwd, input, params.config).item() +
         stage1_aux_loss(fwd, input).item();
}

}  // namespace

std::vector<GradCheckReport> gradient_check(const ModelParams& params,
                                            const SampleInput& input, uint64_t seed,
                                            int per_block, double eps) {
  // Double-precision master copy of every parameter.
  std::vector<std::vector<double>> values(params.arrays.size());
  for (size_t i = 0; i < params.arrays.size(); ++i) {
    values[i].assign(params.arrays[i].data.begin(), params.arrays[i].data.end());
  }

  // Analytic gradients from one double-precision backward pass.
  ForwardOptions options;
  const ForwardPass<double> fwd = build_forward<double>(params, input, options, &values);
  const Tensor<double> loss = add(region_loss(fwd, input, params.config),
                                  stage1_aux_loss(fwd, input));
  loss.backward();

  std::map<std::string, std::vector<std::pair<size_t, size_t>>> by_block;
  for (size_t i = 0; i < params.arrays.size(); ++i) {
    for (size_t k = 0; k < params.arrays[i].size(); ++k) {
      by_block[params.arrays[i].block].emplace_back(i, k);
    }
  }

  Rng rng(mix_seed(seed, 0xC4EC));
  std::vector<GradCheckReport> reports;
  for (auto& [block, entries] : by_block) {
    rng.shuffle(entries);
    const int n = std::min<int>(per_block, static_cast<int>(entries.size()));
    GradCheckReport report;
    report.block = block;
    report.checked = n;
    for (int i = 0; i < n; ++i) {
      const auto [ai, ki] = entries[i];
      const double keep = values[ai][ki];
      values[ai][ki] = keep + eps;
      const double up = combined_loss(params, input, values);
      values[ai][ki] = keep - eps;
      const double down = combined_loss(params, input, values);
      values[ai][ki] = keep;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = fwd.leaves[ai].grad()[ki];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      report.max_rel_err = std::max(report.max_rel_err,
                                    std::abs(analytic - numeric) / denom);
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace bevnav
