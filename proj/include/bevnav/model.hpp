#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bevnav/bev_features.hpp"
#include "bevnav/camera.hpp"
#include "bevnav/grid.hpp"
#include "bevnav/labels.hpp"
#include "bevnav/render.hpp"
#include "bevnav/scene.hpp"
#include "bevnav/tensor.hpp"

namespace bevnav {

// Parameter block names used for learning-rate scaling and gradient checks.
namespace blocks {
inline constexpr const char* kViewEncoder = "view_encoder";
inline constexpr const char* kE3d = "e3d";
inline constexpr const char* kNavAttention = "nav_attention";
inline constexpr const char* kGate = "gate";
inline constexpr const char* kGeomMix = "geom_mix";
inline constexpr const char* kPhi = "phi";
inline constexpr const char* kDecoder = "decoder";
inline constexpr const char* kStage1Heads = "stage1_heads";
}  // namespace blocks

struct ModelConfig {
  GridSpec grid;                 // affordance lattice
  int image_size = 64;           // rendered view side in pixels
  int patch = 8;                 // pixels per visual token side
  int token_dim = 32;
  int nav_dim = 64;
  int bev_width = 32;            // F_BEV channels after projection
  int geom_channels = 8;         // learned 1x1 mix of the pillar features
  int gate_hidden = 8;
  int nav_seed = 8;              // side of the map the summary is projected to
  int nav_seed_channels = 16;
  int nav_up_channels = 4;       // channels of the upsampled summary map
  int dec_hidden1 = 16;
  int dec_hidden2 = 8;
  std::vector<double> height_bins = {0.15, 0.5, 1.0};
  double d_range = kDRange;
  double positive_weight = 1.0;  // weight on region positives in the BCE
  double agent_radius = 0.2;
  double region_radius = 1.0;    // geodesic supervision radius (m)
  std::vector<std::string> vocab;

  int tokens_per_view() const {
    const int side = image_size / patch;
    return side * side;
  }
  int num_tokens() const { return 4 * tokens_per_view(); }
  int pillar_channels() const { return static_cast<int>(height_bins.size()) + 2; }
  /// Stride-2 stages in the view encoder (image -> token grid).
  int encoder_stages() const;
  /// Stride-2 stages from the seed map up to the grid.
  int upsample_stages() const;
  void validate() const;
};

struct ParamArray {
  std::string name;
  std::string block;
  std::vector<int> shape;
  std::vector<float> data;
  double lr_scale = 1.0;

  size_t size() const { return data.size(); }
};

struct ModelParams {
  ModelConfig config;
  uint64_t seed = 0;
  int stage = 0;  // last completed training stage (0 = fresh)
  std::vector<ParamArray> arrays;

  ParamArray& find(const std::string& name);
  const ParamArray& find(const std::string& name) const;
};

/// Seeded deterministic initialization of every parameter array.
ModelParams init_model(const ModelConfig& config, uint64_t seed);

// Checkpoint file: little-endian u32 header length, JSON header (array names,
// shapes, blocks, config, seed, stage), then the float32 blobs concatenated
// in header order.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

// Everything the forward pass needs for one sample, precomputed from the
// scene: rendered colors, token positions, pooling geometry, pillar and
// free-space maps, instruction ids, and the supervision targets.
struct SampleInput {
  std::array<std::vector<float>, 4> color;   // [H*W*3] each, values in [0,1]
  std::vector<double> token_pos;             // [num_tokens * 3]
  std::vector<uint8_t> token_valid;          // per token
  std::vector<std::pair<int, int>> pool_pairs;  // (token index, cell index)
  std::vector<float> pool_counts;            // per cell
  std::vector<float> pillars;                // [cells * pillar_channels]
  std::vector<float> cue;                    // [cells], ternary free-space
  std::vector<int> instruction_ids;
  std::vector<float> region_mask;            // [cells], 0/1
  int dir_label = 0;
  int range_label = 0;
  bool occluded = false;
  bool region_snapped = false;
};

/// Renders the scene and assembles all model inputs and supervision for one
/// (scene, instruction, target) triple.
SampleInput prepare_sample_input(const Scene& scene,
                                 const std::vector<std::string>& instruction, double tx,
                                 double ty, const ModelConfig& config);

template <typename T>
struct ForwardPass {
  std::vector<Tensor<T>> leaves;  // parallel to ModelParams::arrays
  Tensor<T> tokens;               // [num_tokens, token_dim], position-encoded
  Tensor<T> f_nav;                // [nav_dim]
  Tensor<T> gate;                 // [H, W, 1]
  Tensor<T> pre_fusion;           // [H, W, img+1+geom] concat before projection
  Tensor<T> f_bev;                // [H, W, bev_width]
  Tensor<T> logits;               // [H, W, 1]
  Tensor<T> dir_logits;           // [8]
  Tensor<T> range_logits;         // [2]
};

struct ForwardOptions {
  bool need_affordance = true;   // stage-1-only passes skip the BEV branch
  bool with_gradients = true;
};

/// Builds the differentiable graph for one sample. Instantiated for float
/// (training/inference) and double (gradient checks). value_override, when
/// given, supplies the parameter values (one vector per array, same order)
/// instead of the float32 masters — the gradient checker perturbs in full
/// double precision through it.
template <typename T>
ForwardPass<T> build_forward(const ModelParams& params, const SampleInput& input,
                             const ForwardOptions& options = {},
                             const std::vector<std::vector<T>>* value_override = nullptr);

template <typename T>
Tensor<T> region_loss(const ForwardPass<T>& fwd, const SampleInput& input,
                      const ModelConfig& config);

template <typename T>
Tensor<T> stage1_aux_loss(const ForwardPass<T>& fwd, const SampleInput& input);

/// Full forward pass to an affordance map in (0, 1).
BevMap predict_affordance(const ModelParams& params, const SampleInput& input);

extern template ForwardPass<float> build_forward<float>(
    const ModelParams&, const SampleInput&, const ForwardOptions&,
    const std::vector<std::vector<float>>*);
extern template ForwardPass<double> build_forward<double>(
    const ModelParams&, const SampleInput&, const ForwardOptions&,
    const std::vector<std::vector<double>>*);
extern template Tensor<float> region_loss<float>(const ForwardPass<float>&,
                                                 const SampleInput&, const ModelConfig&);
extern template Tensor<double> region_loss<double>(const ForwardPass<double>&,
                                                   const SampleInput&, const ModelConfig&);
extern template Tensor<float> stage1_aux_loss<float>(const ForwardPass<float>&,
                                                     const SampleInput&);
extern template Tensor<double> stage1_aux_loss<double>(const ForwardPass<double>&,
                                                       const SampleInput&);

}  // namespace bevnav
