#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bevnav/model.hpp"

namespace bevnav {

struct TrainSchedule {
  int stage_a_epochs = 1;
  int stage_b_epochs = 2;
  int stage_a_steps = 0;  // > 0 overrides the epoch count
  int stage_b_steps = 0;
  double lr_a = 1e-3;
  double lr_b = 1e-3;
  double momentum = 0.9;
  double bev_lr_multiplier = 5.0;  // stage-B boost on BEV encoder/decoder blocks
  int batch_size = 4;
  uint64_t seed = 1;
};

struct TrainLogEntry {
  int step = 0;   // global across stages
  int stage = 0;  // 1 or 2
  double loss = 0.0;
};

enum class StageSelect { Both, StageA, StageB };

/// Pulls one sample's prepared inputs by dataset index. Must be pure; it may
/// be called from worker threads and repeatedly for the same index.
using SampleLoader = std::function<SampleInput(int)>;

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Momentum-SGD training over the two supervision stages. Stage A drives the
/// coarse direction/range heads, stage B the affordance map; stage B starts
/// from the stage-A weights. Deterministic for a fixed seed: per-sample
/// gradients accumulate in batch index order regardless of thread count.
/// Throws DivergenceError when a loss turns non-finite, std::invalid_argument
/// on an empty dataset.
std::vector<TrainLogEntry> train(ModelParams& params, int num_samples,
                                 const SampleLoader& loader, const TrainSchedule& schedule,
                                 StageSelect stages = StageSelect::Both, int threads = 1);

void write_loss_csv(const std::vector<TrainLogEntry>& log, const std::string& path);

struct GradCheckReport {
  std::string block;
  double max_rel_err = 0.0;
  int checked = 0;
};

/// Central-difference verification of the analytic gradients, in double
/// precision, over a random subsample of parameters per block. The loss is
/// the sum of the region and stage-1 objectives so every block is exercised.
/// Relative errors use max(|analytic|, |numeric|, 1e-6) as denominator.
std::vector<GradCheckReport> gradient_check(const ModelParams& params,
                                            const SampleInput& input, uint64_t seed,
                                            int per_block = 200, double eps = 1e-5);

/// Simple chunked parallel loop; n <= 1 or threads <= 1 runs inline.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace bevnav
