#include "bevnav/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "json.hpp"

#include "bevnav/geodesy.hpp"
#include "bevnav/rng.hpp"

namespace bevnav {

using nlohmann::json;

namespace {

int int_log2(int n) {
  int k = 0;
  while ((1 << k) < n) ++k;
  return (1 << k) == n ? k : -1;
}

}  // namespace

int ModelConfig::encoder_stages() const { return int_log2(patch); }

int ModelConfig::upsample_stages() const { return int_log2(grid.rows() / nav_seed); }

void ModelConfig::validate() const {
  grid.validate();
  if (encoder_stages() <= 0) throw std::invalid_argument("model: patch must be a power of two > 1");
  if (image_size % patch != 0) throw std::invalid_argument("model: image_size % patch != 0");
  if (grid.rows() % nav_seed != 0 || upsample_stages() < 0) {
    throw std::invalid_argument("model: grid rows must be nav_seed * 2^k");
  }
  if (vocab.empty()) throw std::invalid_argument("model: empty vocabulary");
  if (height_bins.empty()) throw std::invalid_argument("model: empty height bins");
}

ParamArray& ModelParams::find(const std::string& name) {
  for (ParamArray& a : arrays) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("ModelParams::find: no array named " + name);
}

const ParamArray& ModelParams::find(const std::string& name) const {
  return const_cast<ModelParams*>(this)->find(name);
}

namespace {

struct ParamBuilder {
  ModelParams& params;
  Rng rng;

  void add(const std::string& name, const std::string& block, std::vector<int> shape,
           double fan_in, double fan_out, double lr_scale = 1.0) {
    ParamArray a;
    a.name = name;
    a.block = block;
    a.shape = std::move(shape);
    a.lr_scale = lr_scale;
    size_t total = 1;
    for (int d : a.shape) total *= static_cast<size_t>(d);
    a.data.resize(total);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (float& v : a.data) v = static_cast<float>(rng.uniform(-limit, limit));
    params.arrays.push_back(std::move(a));
  }

  void add_zeros(const std::string& name, const std::string& block, std::vector<int> shape,
                 double lr_scale = 1.0, float fill = 0.0f) {
    ParamArray a;
    a.name = name;
    a.block = block;
    a.shape = std::move(shape);
    a.lr_scale = lr_scale;
    size_t total = 1;
    for (int d : a.shape) total *= static_cast<size_t>(d);
    a.data.assign(total, fill);
    params.arrays.push_back(std::move(a));
  }
};

int encoder_out_channels(const ModelConfig& cfg, int stage) {
  return stage == cfg.encoder_stages() - 1 ? cfg.token_dim : 8 << stage;
}

int upsample_out_channels(const ModelConfig& cfg, int stage) {
  return stage == cfg.upsample_stages() - 1 ? cfg.nav_up_channels : cfg.nav_seed_channels;
}

int fused_channels(const ModelConfig& cfg) {
  // (1-G) * [pooled tokens + hit density], M, G * geometry mix
  return (cfg.token_dim + 1) + 1 + cfg.geom_channels;
}

}  // namespace

ModelParams init_model(const ModelConfig& config, uint64_t seed) {
  config.validate();
  ModelParams params;
  params.config = config;
  params.seed = seed;
  ParamBuilder b{params, Rng(mix_seed(seed, 0xB11D))};

  int in_ch = 3;
  for (int s = 0; s < config.encoder_stages(); ++s) {
    const int out_ch = encoder_out_channels(config, s);
    b.add("enc" + std::to_string(s) + ".w", blocks::kViewEncoder, {3, 3, in_ch, out_ch},
          9.0 * in_ch, 9.0 * out_ch);
    b.add_zeros("enc" + std::to_string(s) + ".b", blocks::kViewEncoder, {out_ch});
    in_ch = out_ch;
  }

  b.add("e3d.w1", blocks::kE3d, {3, config.token_dim}, 3, config.token_dim);
  b.add_zeros("e3d.b1", blocks::kE3d, {config.token_dim});
  b.add("e3d.w2", blocks::kE3d, {config.token_dim, config.token_dim}, config.token_dim,
        config.token_dim);
  b.add_zeros("e3d.b2", blocks::kE3d, {config.token_dim});
  b.add_zeros("e3d.null", blocks::kE3d, {config.token_dim});

  const int vocab_size = static_cast<int>(config.vocab.size());
  b.add("nav.embed", blocks::kNavAttention, {vocab_size, config.token_dim}, vocab_size,
        config.token_dim);
  b.add("nav.query", blocks::kNavAttention, {config.token_dim}, config.token_dim, 1.0);
  b.add("nav.out_w", blocks::kNavAttention, {config.token_dim, config.nav_dim},
        config.token_dim, config.nav_dim);
  b.add_zeros("nav.out_b", blocks::kNavAttention, {config.nav_dim});

  b.add("gate.w1", blocks::kGate, {3, 3, 1, config.gate_hidden}, 9.0,
        9.0 * config.gate_hidden, 5.0);
  b.add_zeros("gate.b1", blocks::kGate, {config.gate_hidden}, 5.0);
  b.add("gate.w2", blocks::kGate, {3, 3, config.gate_hidden, 1}, 9.0 * config.gate_hidden,
        9.0, 5.0);
  b.add_zeros("gate.b2", blocks::kGate, {1}, 5.0);

  b.add("geom.w", blocks::kGeomMix, {config.pillar_channels(), config.geom_channels},
        config.pillar_channels(), config.geom_channels, 5.0);
  b.add_zeros("geom.b", blocks::kGeomMix, {config.geom_channels}, 5.0);

  b.add("phi.w", blocks::kPhi, {fused_channels(config), config.bev_width},
        fused_channels(config), config.bev_width, 5.0);
  b.add_zeros("phi.b", blocks::kPhi, {config.bev_width}, 5.0);

  const int seed_elems = config.nav_seed * config.nav_seed * config.nav_seed_channels;
  b.add("nav_proj.w", blocks::kDecoder, {config.nav_dim, seed_elems}, config.nav_dim,
        seed_elems, 5.0);
  b.add_zeros("nav_proj.b", blocks::kDecoder, {seed_elems}, 5.0);

  int up_in = config.nav_seed_channels;
  for (int s = 0; s < config.upsample_stages(); ++s) {
    const int out_ch = upsample_out_channels(config, s);
    b.add("up" + std::to_string(s) + ".w", blocks::kDecoder, {2, 2, up_in, out_ch},
          4.0 * up_in, 4.0 * out_ch, 5.0);
    b.add_zeros("up" + std::to_string(s) + ".b", blocks::kDecoder, {out_ch}, 5.0);
    up_in = out_ch;
  }

  const int dec_in = config.bev_width + config.nav_up_channels;
  b.add("dec0.w", blocks::kDecoder, {3, 3, dec_in, config.dec_hidden1}, 9.0 * dec_in,
        9.0 * config.dec_hidden1, 5.0);
  b.add_zeros("dec0.b", blocks::kDecoder, {config.dec_hidden1}, 5.0);
  b.add("dec1.w", blocks::kDecoder, {3, 3, config.dec_hidden1, config.dec_hidden2},
        9.0 * config.dec_hidden1, 9.0 * config.dec_hidden2, 5.0);
  b.add_zeros("dec1.b", blocks::kDecoder, {config.dec_hidden2}, 5.0);
  b.add("dec2.w", blocks::kDecoder, {3, 3, config.dec_hidden2, 1},
        9.0 * config.dec_hidden2, 9.0, 5.0);
  // Bias the initial affordance toward the ~2% positive rate of region masks.
  b.add_zeros("dec2.b", blocks::kDecoder, {1}, 5.0, -2.0f);

  b.add("head.dir_w", blocks::kStage1Heads, {config.nav_dim, 8}, config.nav_dim, 8);
  b.add_zeros("head.dir_b", blocks::kStage1Heads, {8});
  b.add("head.range_w", blocks::kStage1Heads, {config.nav_dim, 2}, config.nav_dim, 2);
  b.add_zeros("head.range_b", blocks::kStage1Heads, {2});

  return params;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

json config_to_json(const ModelConfig& c) {
  json j;
  j["grid"] = {{"bound", c.grid.bound}, {"cell", c.grid.cell}};
  j["image_size"] = c.image_size;
  j["patch"] = c.patch;
  j["token_dim"] = c.token_dim;
  j["nav_dim"] = c.nav_dim;
  j["bev_width"] = c.bev_width;
  j["geom_channels"] = c.geom_channels;
  j["gate_hidden"] = c.gate_hidden;
  j["nav_seed"] = c.nav_seed;
  j["nav_seed_channels"] = c.nav_seed_channels;
  j["nav_up_channels"] = c.nav_up_channels;
  j["dec_hidden1"] = c.dec_hidden1;
  j["dec_hidden2"] = c.dec_hidden2;
  j["height_bins"] = c.height_bins;
  j["d_range"] = c.d_range;
  j["positive_weight"] = c.positive_weight;
  j["agent_radius"] = c.agent_radius;
  j["region_radius"] = c.region_radius;
  j["vocab"] = c.vocab;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.grid.bound = j.at("grid").at("bound").get<double>();
  c.grid.cell = j.at("grid").at("cell").get<double>();
  c.image_size = j.at("image_size").get<int>();
  c.patch = j.at("patch").get<int>();
  c.token_dim = j.at("token_dim").get<int>();
  c.nav_dim = j.at("nav_dim").get<int>();
  c.bev_width = j.at("bev_width").get<int>();
  c.geom_channels = j.at("geom_channels").get<int>();
  c.gate_hidden = j.at("gate_hidden").get<int>();
  c.nav_seed = j.at("nav_seed").get<int>();
  c.nav_seed_channels = j.at("nav_seed_channels").get<int>();
  c.nav_up_channels = j.at("nav_up_channels").get<int>();
  c.dec_hidden1 = j.at("dec_hidden1").get<int>();
  c.dec_hidden2 = j.at("dec_hidden2").get<int>();
  c.height_bins = j.at("height_bins").get<std::vector<double>>();
  c.d_range = j.at("d_range").get<double>();
  c.positive_weight = j.at("positive_weight").get<double>();
  c.agent_radius = j.at("agent_radius").get<double>();
  c.region_radius = j.at("region_radius").get<double>();
  c.vocab = j.at("vocab").get<std::vector<std::string>>();
  return c;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  json header;
  header["config"] = config_to_json(params.config);
  header["seed"] = params.seed;
  header["stage"] = params.stage;
  json arrays = json::array();
  for (const ParamArray& a : params.arrays) {
    arrays.push_back({{"name", a.name},
                      {"block", a.block},
                      {"shape", a.shape},
                      {"lr_scale", a.lr_scale}});
  }
  header["arrays"] = arrays;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const uint32_t hlen = static_cast<uint32_t>(htext.size());
  out.write(reinterpret_cast<const char*>(&hlen), 4);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const ParamArray& a : params.arrays) {
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  uint32_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 4);
  if (!in || hlen == 0 || hlen > (1u << 24)) {
    throw std::runtime_error("load_checkpoint: bad header in " + path);
  }
  std::string htext(hlen, '\0');
  in.read(htext.data(), hlen);
  if (!in) throw std::runtime_error("load_checkpoint: truncated header in " + path);
  const json header = json::parse(htext);

  ModelParams params;
  params.config = config_from_json(header.at("config"));
  params.seed = header.at("seed").get<uint64_t>();
  params.stage = header.at("stage").get<int>();
  for (const json& ja : header.at("arrays")) {
    ParamArray a;
    a.name = ja.at("name").get<std::string>();
    a.block = ja.at("block").get<std::string>();
    a.shape = ja.at("shape").get<std::vector<int>>();
    a.lr_scale = ja.at("lr_scale").get<double>();
    size_t total = 1;
    for (int d : a.shape) total *= static_cast<size_t>(d);
    a.data.resize(total);
    in.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(total * sizeof(float)));
    if (!in) throw std::runtime_error("load_checkpoint: truncated blob in " + path);
    params.arrays.push_back(std::move(a));
  }
  return params;
}

// ---------------------------------------------------------------------------
// Sample preparation
// ---------------------------------------------------------------------------

SampleInput prepare_sample_input(const Scene& scene,
                                 const std::vector<std::string>& instruction, double tx,
                                 double ty, const ModelConfig& config) {
  config.validate();
  const CameraRig rig;
  const CameraIntrinsics intr =
      intrinsics_from_fov(config.image_size, config.image_size, 90.0);
  const auto views = render_rig(scene, rig, intr);

  SampleInput in;
  const int side = config.image_size / config.patch;
  const int num_tokens = config.num_tokens();
  const int cells = config.grid.num_cells();
  in.token_pos.assign(static_cast<size_t>(num_tokens) * 3, 0.0);
  in.token_valid.assign(num_tokens, 0);
  in.pool_counts.assign(cells, 0.0f);

  std::vector<int> patch_hits(num_tokens, 0);
  std::vector<UnprojectedPoint> all_points;
  std::array<DepthImage, 4> depths;

  for (int v = 0; v < 4; ++v) {
    const ColorImage& img = views[v].color;
    in.color[v].resize(img.rgb.size());
    for (size_t i = 0; i < img.rgb.size(); ++i) {
      in.color[v][i] = static_cast<float>(img.rgb[i]) / 255.0f;
    }
    depths[v] = views[v].depth;

    const auto points = unproject_depth(views[v].depth, intr, rig, v);
    for (const UnprojectedPoint& p : points) {
      const int token = v * side * side + (p.v / config.patch) * side + (p.u / config.patch);
      in.token_pos[static_cast<size_t>(token) * 3 + 0] += p.x;
      in.token_pos[static_cast<size_t>(token) * 3 + 1] += p.y;
      in.token_pos[static_cast<size_t>(token) * 3 + 2] += p.z;
      ++patch_hits[token];
      const auto cell = world_to_cell(config.grid, p.x, p.y);
      if (cell) {
        const int idx = cell->row * config.grid.cols() + cell->col;
        in.pool_pairs.emplace_back(token, idx);
        in.pool_counts[idx] += 1.0f;
      }
    }
    all_points.insert(all_points.end(), points.begin(), points.end());
  }
  for (int t = 0; t < num_tokens; ++t) {
    if (patch_hits[t] > 0) {
      in.token_valid[t] = 1;
      for (int d = 0; d < 3; ++d) {
        in.token_pos[static_cast<size_t>(t) * 3 + d] /= patch_hits[t];
      }
    }
  }

  in.pillars = geometry_pillars(all_points, config.grid, config.height_bins).data;
  in.cue = freespace_cue(depths, rig, intr, config.grid).data;

  for (const std::string& tok : instruction) {
    int id = -1;
    for (size_t i = 0; i < config.vocab.size(); ++i) {
      if (config.vocab[i] == tok) {
        id = static_cast<int>(i);
        break;
      }
    }
    if (id < 0) throw std::invalid_argument("prepare_sample_input: unknown token " + tok);
    in.instruction_ids.push_back(id);
  }

  const TravGrid trav = traversability_from_scene(scene, config.grid, config.agent_radius);
  const TargetRegion region = target_region(trav, tx, ty, config.region_radius);
  in.region_mask.assign(cells, 0.0f);
  for (int i = 0; i < cells; ++i) in.region_mask[i] = region.mask.mask[i] ? 1.0f : 0.0f;
  in.region_snapped = region.snapped;

  in.dir_label = static_cast<int>(direction_bin(tx, ty));
  in.range_label = static_cast<int>(range_bin(tx, ty, config.d_range));
  in.occluded = occlusion_test(tx, ty, views, rig, intr);
  return in;
}

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

namespace {

template <typename T>
std::vector<T> widen(const std::vector<float>& v) {
  return std::vector<T>(v.begin(), v.end());
}

}  // namespace

template <typename T>
ForwardPass<T> build_forward(const ModelParams& params, const SampleInput& input,
                             const ForwardOptions& options,
                             const std::vector<std::vector<T>>* value_override) {
  const ModelConfig& cfg = params.config;
  const int H = cfg.grid.rows(), W = cfg.grid.cols();
  const int side = cfg.image_size / cfg.patch;

  ForwardPass<T> fwd;
  fwd.leaves.reserve(params.arrays.size());
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < params.arrays.size(); ++i) {
    const ParamArray& a = params.arrays[i];
    std::vector<T> v = value_override ? (*value_override)[i] : widen<T>(a.data);
    fwd.leaves.push_back(Tensor<T>::leaf(a.shape, std::move(v), options.with_gradients));
    index[a.name] = static_cast<int>(i);
  }
  auto leaf = [&](const std::string& name) -> const Tensor<T>& {
    return fwd.leaves[index.at(name)];
  };

  // View encoder: stride-2 conv stack down to the token grid.
  std::vector<Tensor<T>> view_tokens;
  for (int v = 0; v < 4; ++v) {
    Tensor<T> x = Tensor<T>::constant({cfg.image_size, cfg.image_size, 3},
                                      widen<T>(input.color[v]));
    for (int s = 0; s < cfg.encoder_stages(); ++s) {
      x = conv2d(x, leaf("enc" + std::to_string(s) + ".w"),
                 leaf("enc" + std::to_string(s) + ".b"), 2, 1);
      x = tanh_t(x);
    }
    view_tokens.push_back(reshape(x, {side * side, cfg.token_dim}));
  }
  Tensor<T> tokens = concat_rows(view_tokens);  // [num_tokens, token_dim]

  // Per-token 3D position embedding added to the visual tokens; patches with
  // no depth evidence get the learned null embedding instead.
  Tensor<T> pos = Tensor<T>::constant(
      {cfg.num_tokens(), 3},
      std::vector<T>(input.token_pos.begin(), input.token_pos.end()));
  Tensor<T> e3 = tanh_t(linear_rows(pos, leaf("e3d.w1"), leaf("e3d.b1")));
  e3 = linear_rows(e3, leaf("e3d.w2"), leaf("e3d.b2"));
  e3 = mask_rows_replace(e3, input.token_valid, leaf("e3d.null"));
  tokens = add(tokens, e3);
  fwd.tokens = tokens;

  // Instruction-conditioned summary: one attention read over all tokens.
  Tensor<T> instr = embed_mean(leaf("nav.embed"), input.instruction_ids);
  Tensor<T> query = add(instr, leaf("nav.query"));
  Tensor<T> att = matmul(tokens, reshape(query, {cfg.token_dim, 1}));
  att = scale(reshape(att, {cfg.num_tokens()}),
              T(1) / std::sqrt(static_cast<T>(cfg.token_dim)));
  Tensor<T> alpha = softmax1d(att);
  Tensor<T> ctx = matmul(reshape(alpha, {1, cfg.num_tokens()}), tokens);
  fwd.f_nav = reshape(linear_rows(ctx, leaf("nav.out_w"), leaf("nav.out_b")),
                      {cfg.nav_dim});

  fwd.dir_logits =
      reshape(linear_rows(fwd.f_nav, leaf("head.dir_w"), leaf("head.dir_b")), {8});
  fwd.range_logits =
      reshape(linear_rows(fwd.f_nav, leaf("head.range_w"), leaf("head.range_b")), {2});

  if (!options.need_affordance) return fwd;

  // Image branch: pooled token features plus a bounded hit-density channel.
  Tensor<T> pooled = scatter_mean_pool(tokens, input.pool_pairs, input.pool_counts, H, W);
  std::vector<T> density(static_cast<size_t>(H) * W);
  for (size_t i = 0; i < density.size(); ++i) {
    const T c = static_cast<T>(input.pool_counts[i]);
    density[i] = c / (c + T(8));
  }
  Tensor<T> f_img = concat_channels<T>(
      {pooled, Tensor<T>::constant({H, W, 1}, std::move(density))});

  // Geometry branch: learned 1x1 mix of the pillar histograms.
  Tensor<T> pillars = Tensor<T>::constant({H, W, cfg.pillar_channels()},
                                          widen<T>(input.pillars));
  Tensor<T> f_geom = tanh_t(reshape(
      linear_rows(pillars, leaf("geom.w"), leaf("geom.b")), {H, W, cfg.geom_channels}));

  // Free-space cue and the per-cell gate predicted from it.
  Tensor<T> cue = Tensor<T>::constant({H, W, 1}, widen<T>(input.cue));
  Tensor<T> g1 = tanh_t(conv2d(cue, leaf("gate.w1"), leaf("gate.b1"), 1, 1));
  fwd.gate = sigmoid_t(conv2d(g1, leaf("gate.w2"), leaf("gate.b2"), 1, 1));

  // Gated fusion, concatenated as [(1-G) . image, M, G . geometry].
  Tensor<T> img_block = mul_gate(f_img, rsub_scalar(T(1), fwd.gate));
  Tensor<T> geom_block = mul_gate(f_geom, fwd.gate);
  fwd.pre_fusion = concat_channels<T>({img_block, cue, geom_block});
  fwd.f_bev = reshape(linear_rows(fwd.pre_fusion, leaf("phi.w"), leaf("phi.b")),
                      {H, W, cfg.bev_width});

  // Summary-to-map projection and transposed-conv upsampling to the grid.
  Tensor<T> seed = tanh_t(reshape(
      linear_rows(fwd.f_nav, leaf("nav_proj.w"), leaf("nav_proj.b")),
      {cfg.nav_seed, cfg.nav_seed, cfg.nav_seed_channels}));
  for (int s = 0; s < cfg.upsample_stages(); ++s) {
    seed = tanh_t(conv_transpose2x2(seed, leaf("up" + std::to_string(s) + ".w"),
                                    leaf("up" + std::to_string(s) + ".b")));
  }

  Tensor<T> dec = concat_channels<T>({fwd.f_bev, seed});
  dec = tanh_t(conv2d(dec, leaf("dec0.w"), leaf("dec0.b"), 1, 1));
  dec = tanh_t(conv2d(dec, leaf("dec1.w"), leaf("dec1.b"), 1, 1));
  fwd.logits = conv2d(dec, leaf("dec2.w"), leaf("dec2.b"), 1, 1);
  return fwd;
}

template <typename T>
Tensor<T> region_loss(const ForwardPass<T>& fwd, const SampleInput& input,
                      const ModelConfig& config) {
  return bce_with_logits_mean(fwd.logits, input.region_mask,
                              static_cast<T>(config.positive_weight));
}

template <typename T>
Tensor<T> stage1_aux_loss(const ForwardPass<T>& fwd, const SampleInput& input) {
  return add(softmax_cross_entropy(fwd.dir_logits, input.dir_label),
             softmax_cross_entropy(fwd.range_logits, input.range_label));
}

BevMap predict_affordance(const ModelParams& params, const SampleInput& input) {
  ForwardOptions options;
  options.with_gradients = false;
  const ForwardPass<float> fwd = build_forward<float>(params, input, options);
  BevMap out(params.config.grid, 1);
  for (size_t i = 0; i < out.data.size(); ++i) {
    const float l = fwd.logits.value()[i];
    out.data[i] = l >= 0.0f ? 1.0f / (1.0f + std::exp(-l))
                            : std::exp(l) / (1.0f + std::exp(l));
  }
  return out;
}

template ForwardPass<float> build_forward<float>(const ModelParams&, const SampleInput&,
                                                 const ForwardOptions&,
                                                 const std::vector<std::vector<float>>*);
template ForwardPass<double> build_forward<double>(const ModelParams&, const SampleInput&,
                                                   const ForwardOptions&,
                                                   const std::vector<std::vector<double>>*);
template Tensor<float> region_loss<float>(const ForwardPass<float>&, const SampleInput&,
                                          const ModelConfig&);
template Tensor<double> region_loss<double>(const ForwardPass<double>&, const SampleInput&,
                                            const ModelConfig&);
template Tensor<float> stage1_aux_loss<float>(const ForwardPass<float>&, const SampleInput&);
template Tensor<double> stage1_aux_loss<double>(const ForwardPass<double>&,
                                                const SampleInput&);

}  // namespace bevnav
