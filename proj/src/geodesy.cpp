#include "bevnav/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "bevnav/bev_features.hpp"

namespace bevnav {

TravGrid traversability_from_scene(const Scene& scene, const GridSpec& spec,
                                   double agent_radius) {
  TravGrid grid(spec);
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      double ax, ay;
      cell_center(spec, r, c, ax, ay);
      double wx, wy;
      agent_to_world(scene.agent, ax, ay, wx, wy);

      if (std::abs(wx) > scene.floor_half_size || std::abs(wy) > scene.floor_half_size) {
        grid.at(r, c) = CellState::StaticBlocked;
        continue;
      }
      for (const Obstacle& o : scene.obstacles) {
        if (obstacle_footprint_distance(o, wx, wy) <= agent_radius) {
          // Static structure wins over pedestrians when both cover a cell.
          if (!o.transient) {
            grid.at(r, c) = CellState::StaticBlocked;
            break;
          }
          if (grid.at(r, c) == CellState::Free) {
            grid.at(r, c) = CellState::TransientBlocked;
          }
        }
      }
    }
  }
  return grid;
}

TravGrid traversability_from_depth(const std::array<RenderedView, 4>& views,
                                   const CameraRig& rig, const CameraIntrinsics& intr,
                                   const GridSpec& spec) {
  std::array<DepthImage, 4> depths;
  for (int v = 0; v < 4; ++v) depths[v] = views[v].depth;
  const BevMap cue = freespace_cue(depths, rig, intr, spec);

  TravGrid grid(spec);
  for (int i = 0; i < spec.num_cells(); ++i) {
    grid.state[i] = cue.data[i] == kCueFree ? CellState::Free : CellState::StaticBlocked;
  }
  return grid;
}

DistanceField geodesic_field(const TravGrid& trav, Cell source, bool transient_blocks) {
  const GridSpec& spec = trav.spec;
  if (source.row < 0 || source.row >= spec.rows() || source.col < 0 ||
      source.col >= spec.cols()) {
    throw std::out_of_range("geodesic_field: source out of range");
  }

  DistanceField field;
  field.spec = spec;
  field.dist.assign(spec.num_cells(), kInfDist);
  if (!trav.passable(source.row, source.col, transient_blocks)) return field;

  const double straight = spec.cell;
  const double diagonal = spec.cell * std::sqrt(2.0);
  const int cols = spec.cols();

  using Entry = std::pair<double, int>;  // (distance, flat index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  const int src = source.row * cols + source.col;
  field.dist[src] = 0.0;
  heap.push({0.0, src});

  while (!heap.empty()) {
    const auto [d, idx] = heap.top();
    heap.pop();
    if (d > field.dist[idx]) continue;
    const int r = idx / cols, c = idx % cols;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int nr = r + dr, nc = c + dc;
        if (nr < 0 || nr >= spec.rows() || nc < 0 || nc >= cols) continue;
        if (!trav.passable(nr, nc, transient_blocks)) continue;
        const double nd = d + ((dr != 0 && dc != 0) ? diagonal : straight);
        const int nidx = nr * cols + nc;
        if (nd < field.dist[nidx]) {
          field.dist[nidx] = nd;
          heap.push({nd, nidx});
        }
      }
    }
  }
  return field;
}

TargetRegion target_region(const TravGrid& trav, double px, double py, double r) {
  const auto cell = world_to_cell(trav.spec, px, py);
  if (!cell) throw std::out_of_range("target_region: target outside grid");

  TargetRegion region;
  region.center = *cell;
  region.snapped = false;
  if (!trav.passable(cell->row, cell->col)) {
    region.center = snap_to_traversable(trav, *cell);
    region.snapped = true;
  }

  const DistanceField field = geodesic_field(trav, region.center);
  region.mask.spec = trav.spec;
  region.mask.mask.assign(trav.spec.num_cells(), 0);
  for (int i = 0; i < trav.spec.num_cells(); ++i) {
    if (field.dist[i] <= r) region.mask.mask[i] = 1;
  }
  return region;
}

Cell snap_to_traversable(const TravGrid& trav, Cell from) {
  const GridSpec& spec = trav.spec;
  if (from.row < 0 || from.row >= spec.rows() || from.col < 0 || from.col >= spec.cols()) {
    throw std::out_of_range("snap_to_traversable: cell out of range");
  }
  if (trav.passable(from.row, from.col)) return from;

  // Expanding Chebyshev rings; squared cell distances are exact integers so
  // ties resolve deterministically to the lowest row-major index.
  long best_d2 = -1;
  Cell best{0, 0};
  const int max_ring = std::max(std::max(from.row, spec.rows() - 1 - from.row),
                                std::max(from.col, spec.cols() - 1 - from.col));
  for (int ring = 1; ring <= max_ring; ++ring) {
    if (best_d2 >= 0 && static_cast<long>(ring) * ring > best_d2) break;
    for (int r = from.row - ring; r <= from.row + ring; ++r) {
      if (r < 0 || r >= spec.rows()) continue;
      const bool edge_row = (r == from.row - ring || r == from.row + ring);
      const int cstep = edge_row ? 1 : 2 * ring;
      for (int c = from.col - ring; c <= from.col + ring; c += cstep) {
        if (c < 0 || c >= spec.cols()) continue;
        if (!trav.passable(r, c)) continue;
        const long dr = r - from.row, dc = c - from.col;
        const long d2 = dr * dr + dc * dc;
        if (best_d2 < 0 || d2 < best_d2 ||
            (d2 == best_d2 &&
             static_cast<long>(r) * spec.cols() + c <
                 static_cast<long>(best.row) * spec.cols() + best.col)) {
          best_d2 = d2;
          best = {r, c};
        }
      }
    }
  }
  if (best_d2 < 0) throw std::runtime_error("snap_to_traversable: no traversable cell");
  return best;
}

namespace {

BevMap travgrid_as_bevmap(const TravGrid& grid) {
  BevMap map(grid.spec, 1);
  for (int i = 0; i < grid.spec.num_cells(); ++i) {
    map.data[i] = static_cast<float>(grid.state[i]);
  }
  return map;
}

}  // namespace

void save_travgrid(const TravGrid& grid, const std::string& path) {
  save_bevmap(travgrid_as_bevmap(grid), path);
}

TravGrid load_travgrid(const std::string& path) {
  const BevMap map = load_bevmap(path);
  if (map.channels != 1) throw std::runtime_error("load_travgrid: expected 1 channel");
  TravGrid grid(map.spec);
  for (int i = 0; i < map.spec.num_cells(); ++i) {
    const int v = static_cast<int>(map.data[i]);
    if (v < 0 || v > 2) throw std::runtime_error("load_travgrid: bad state value");
    grid.state[i] = static_cast<CellState>(v);
  }
  return grid;
}

void save_region(const RegionMask& mask, const std::string& path) {
  BevMap map(mask.spec, 1);
  for (int i = 0; i < mask.spec.num_cells(); ++i) map.data[i] = mask.mask[i] ? 1.0f : 0.0f;
  save_bevmap(map, path);
}

RegionMask load_region(const std::string& path) {
  const BevMap map = load_bevmap(path);
  if (map.channels != 1) throw std::runtime_error("load_region: expected 1 channel");
  RegionMask mask;
  mask.spec = map.spec;
  mask.mask.assign(map.spec.num_cells(), 0);
  for (int i = 0; i < map.spec.num_cells(); ++i) mask.mask[i] = map.data[i] != 0.0f ? 1 : 0;
  return mask;
}

}  // namespace bevnav
