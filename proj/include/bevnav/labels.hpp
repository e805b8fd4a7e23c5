#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>

#include "bevnav/camera.hpp"
#include "bevnav/geodesy.hpp"
#include "bevnav/render.hpp"
#include "bevnav/scene.hpp"

namespace bevnav {

/// Range split threshold between a small and a big step (m).
constexpr double kDRange = 2.4;

/// Height at which a floor target is probed for visibility (m).
constexpr double kTargetProbeHeight = 0.3;

// Eight 45-degree heading sectors, counterclockwise from Front = [-22.5, 22.5).
enum class Direction8 {
  Front = 0,
  FrontLeft,
  Left,
  BackLeft,
  Back,
  BackRight,
  Right,
  FrontRight
};

enum class RangeBin { Small = 0, Big = 1 };

const char* direction_name(Direction8 d);
std::optional<Direction8> direction_from_name(const std::string& s);

/// Sector of an agent-frame point (x forward, y left). Bins are half-open.
/// Throws std::domain_error at the origin.
Direction8 direction_bin(double x, double y);

/// Small iff |p| < d_range (strict; the boundary lands in Big).
RangeBin range_bin(double x, double y, double d_range = kDRange);

/// Templated coarse answer, e.g.
/// "Move towards the FrontLeft region with a small step."
std::string stage1_answer(Direction8 d, RangeBin r);

/// Inverse of stage1_answer; nullopt when the text does not match the
/// template byte for byte.
std::optional<std::pair<Direction8, RangeBin>> parse_stage1_answer(const std::string& text);

/// Depth-consistency visibility test: the target (lifted to probe height) is
/// occluded iff every view either cannot see its pixel (behind camera or out
/// of image) or renders depth more than `margin` short of the target's depth.
bool occlusion_test(double tx, double ty, const std::array<RenderedView, 4>& views,
                    const CameraRig& rig, const CameraIntrinsics& intr,
                    double margin = 0.1);

enum class AdmitResult { Admitted, OutOfBound, NonTraversable, HeightChange };

const char* admit_result_name(AdmitResult r);

/// Sample admission filter: rejects targets outside the grid bound, on
/// non-traversable cells, or with a floor height change above 0.5 m
/// relative to the agent (always passes on flat floors, still evaluated).
AdmitResult admit_sample(double tx, double ty, const Scene& scene, const GridSpec& spec,
                         double agent_radius = 0.2);

}  // namespace bevnav
