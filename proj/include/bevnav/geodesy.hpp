#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bevnav/camera.hpp"
#include "bevnav/grid.hpp"
#include "bevnav/render.hpp"
#include "bevnav/scene.hpp"

namespace bevnav {

enum class CellState : uint8_t { Free = 0, StaticBlocked = 1, TransientBlocked = 2 };

struct TravGrid {
  GridSpec spec;
  std::vector<CellState> state;

  TravGrid() = default;
  explicit TravGrid(const GridSpec& s) : spec(s), state(s.num_cells(), CellState::Free) {}

  CellState at(int row, int col) const {
    return state[static_cast<size_t>(row) * spec.cols() + col];
  }
  CellState& at(int row, int col) {
    return state[static_cast<size_t>(row) * spec.cols() + col];
  }
  /// Passable for geodesics and metrics: pedestrian cells count as free.
  bool passable(int row, int col, bool transient_blocks = false) const {
    const CellState s = at(row, col);
    if (s == CellState::StaticBlocked) return false;
    if (s == CellState::TransientBlocked) return transient_blocks ? false : true;
    return true;
  }
};

constexpr double kInfDist = std::numeric_limits<double>::infinity();

// Per-cell geodesic distance in meters from a source cell; infinity where
// unreachable or blocked.
struct DistanceField {
  GridSpec spec;
  std::vector<double> dist;

  double at(int row, int col) const {
    return dist[static_cast<size_t>(row) * spec.cols() + col];
  }
};

struct RegionMask {
  GridSpec spec;
  std::vector<uint8_t> mask;

  bool at(int row, int col) const {
    return mask[static_cast<size_t>(row) * spec.cols() + col] != 0;
  }
  void set(int row, int col, bool v) {
    mask[static_cast<size_t>(row) * spec.cols() + col] = v ? 1 : 0;
  }
};

/// Oracle traversability: a cell is blocked when its center lies within an
/// obstacle footprint inflated by agent_radius, or off the floor slab.
TravGrid traversability_from_scene(const Scene& scene, const GridSpec& spec,
                                   double agent_radius = 0.2);

/// Depth-only traversability estimate: free where the free-space cue observed
/// free, static-blocked where observed occupied, unknown treated as blocked.
TravGrid traversability_from_depth(const std::array<RenderedView, 4>& views,
                                   const CameraRig& rig, const CameraIntrinsics& intr,
                                   const GridSpec& spec);

/// 8-connected shortest-path distances over passable cells. Edge costs are
/// cell and sqrt(2)*cell. A blocked source yields all-infinite distances.
DistanceField geodesic_field(const TravGrid& trav, Cell source,
                             bool transient_blocks = false);

struct TargetRegion {
  RegionMask mask;
  Cell center;          // target cell after any snapping
  bool snapped = false; // the target cell was blocked and had to move
};

/// Cells within geodesic radius r of the target point. A blocked target cell
/// is first snapped to the nearest traversable cell and the event flagged.
/// Throws std::out_of_range when the point is outside the grid.
TargetRegion target_region(const TravGrid& trav, double px, double py, double r);

/// Nearest passable cell by Euclidean center distance; ties break toward the
/// lowest row-major index. Throws std::runtime_error when no cell is passable.
Cell snap_to_traversable(const TravGrid& trav, Cell from);

// TravGrid and RegionMask reuse the BevMap binary container with one channel;
// traversability states are encoded 0/1/2.
void save_travgrid(const TravGrid& grid, const std::string& path);
TravGrid load_travgrid(const std::string& path);
void save_region(const RegionMask& mask, const std::string& path);
RegionMask load_region(const std::string& path);

}  // namespace bevnav
