#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "bevnav/grid.hpp"
#include "bevnav/labels.hpp"
#include "bevnav/scene.hpp"

namespace bevnav {

struct SceneConfig {
  double floor_half_size = 8.0;
  Pose2 agent;
  int box_count = 3;
  int cylinder_count = 1;
  int pedestrian_count = 2;
  double min_obstacle_height = 1.4;
  double max_obstacle_height = 2.2;
  double min_box_half = 0.25;
  double max_box_half = 0.9;
  double min_cyl_radius = 0.25;
  double max_cyl_radius = 0.5;
  double agent_margin = 0.8;   // keep-out radius around the agent (m)
  double obstacle_gap = 0.25;  // minimum footprint separation (m)
  int max_retries = 64;
  GridSpec grid;
  double agent_radius = 0.2;
  int resolution = 64;         // rendered view size used for occlusion flags
  double rel_fraction = 0.5;   // share of relational (landmark) instructions
};

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pedestrian occluder dimensions.
constexpr double kPedestrianRadius = 0.3;
constexpr double kPedestrianHeight = 1.7;
/// Pedestrians are never placed within this distance of a sample target (m).
constexpr double kPedestrianTargetClearance = 1.0;

/// Seeded procedural scene: boxes and cylinders with unique (color, kind)
/// referents, plus transient pedestrian cylinders. Retries until every
/// 45-degree sector has a traversable cell; throws GenerationError when the
/// config is too dense to place.
Scene generate_scene(uint64_t seed, const SceneConfig& config);

/// Fixed instruction vocabulary of the mini-grammar.
const std::vector<std::string>& instruction_vocabulary();

/// Grammar:
///   relational: <rel> <color> <kind>,  rel in {behind, in_front_of,
///               left_of, right_of, near}
///   ego:        go_to <Direction8> <small|big>
/// Resolves to a traversable cell center in the agent frame, or nullopt when
/// the referent is absent/ambiguous or no traversable cell fits the zone.
std::optional<std::pair<double, double>> resolve_instruction_target(
    const Scene& scene, const std::vector<std::string>& instruction,
    const GridSpec& grid, double agent_radius = 0.2);

enum class Split { Train, Val };

struct Sample {
  std::string id;
  std::string scene_file;
  std::vector<std::string> instruction;
  double tx = 0.0, ty = 0.0;  // target, agent frame (m)
  bool occluded = false;
  Split split = Split::Train;
  Direction8 dir = Direction8::Front;
  RangeBin range = RangeBin::Small;
  std::string stage1_text;
};

enum class RejectReason { OutOfBound, Unresolvable, NonTraversable, HeightChange };
const char* reject_reason_name(RejectReason r);

using SampleResult = std::variant<Sample, RejectReason>;

/// Draws one instruction from the grammar, resolves and admits its target,
/// and sets the occlusion flag from rendered views. Rejections are values.
SampleResult generate_sample(uint64_t seed, const Scene& scene, const SceneConfig& config);

struct DatasetConfig {
  SceneConfig scene;
  double occluded_target = 0.35;
  double occluded_tol = 0.10;
  double val_fraction = 0.2;
  int max_attempts_per_sample = 200;
  bool strict_occlusion = false;
};

struct ManifestSummary {
  int count = 0;
  int train_count = 0;
  int val_count = 0;
  int occluded_count = 0;
  double occluded_fraction = 0.0;
  bool occlusion_target_met = true;
  std::string warning;
};

/// Generates `count` samples (one scene file per sample, written next to the
/// manifest under scenes/), steering the occluded fraction into the
/// configured band by rejection sampling. The manifest is JSON lines written
/// atomically via a temp file. Throws on I/O failure; an unmeetable
/// occlusion band throws only under strict_occlusion, otherwise warns.
ManifestSummary generate_dataset(const DatasetConfig& config, int count, uint64_t seed,
                                 const std::string& manifest_path);

struct ManifestRecord {
  Sample sample;
};

std::vector<ManifestRecord> load_manifest(const std::string& path);
std::string sample_to_json(const Sample& s);
Sample sample_from_json(const std::string& line);

}  // namespace bevnav
