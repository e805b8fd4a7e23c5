#pragma once

#include <array>
#include <vector>

#include "bevnav/camera.hpp"
#include "bevnav/grid.hpp"
#include "bevnav/render.hpp"

namespace bevnav {

// Free-space cue cell values.
constexpr float kCueUnknown = 0.0f;
constexpr float kCueFree = 1.0f;
constexpr float kCueOccupied = -1.0f;

/// Height above which a depth hit counts as an obstacle rather than floor
/// in the free-space cue.
constexpr double kObstacleHeight = 0.15;

/// Mean-pools per-point features onto the grid. Output has feature_dim + 1
/// channels; the last channel counts the points that landed in each cell.
/// Points outside the grid are ignored. Empty cells stay zero.
BevMap pool_image_features(const std::vector<UnprojectedPoint>& points,
                           const std::vector<float>& features, int feature_dim,
                           const GridSpec& spec);

/// Per-cell normalized histogram of point heights over the given bin edges
/// (strictly increasing; edges split z into edges.size()+1 bins), plus a
/// max-height channel. Histogram channels of a non-empty cell sum to 1.
BevMap geometry_pillars(const std::vector<UnprojectedPoint>& points,
                        const GridSpec& spec, const std::vector<double>& height_bins);

/// Ternary free-space cue from ray casting the depth views onto the grid:
/// 1 observed free, -1 observed occupied, 0 unknown. Occupied wins merges.
BevMap freespace_cue(const std::array<DepthImage, 4>& depth_views, const CameraRig& rig,
                     const CameraIntrinsics& intr, const GridSpec& spec);

/// Grid cells crossed by the segment from (x0,y0) to (x1,y1), in traversal
/// order, clipped to the grid. Integer DDA over cell boundaries.
std::vector<Cell> trace_cells(const GridSpec& spec, double x0, double y0, double x1,
                              double y1);

}  // namespace bevnav
