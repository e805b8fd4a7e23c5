#include "bevnav/bev_features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bevnav {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BevMap pool_image_features(const std::vector<UnprojectedPoint>& points,
                           const std::vector<float>& features, int feature_dim,
                           const GridSpec& spec) {
  if (feature_dim <= 0) throw std::invalid_argument("pool_image_features: bad feature_dim");
  if (features.size() != points.size() * static_cast<size_t>(feature_dim)) {
    throw std::invalid_argument("pool_image_features: points/features size mismatch");
  }

  BevMap out(spec, feature_dim + 1);  // last channel counts hits
  for (size_t i = 0; i < points.size(); ++i) {
    const auto cell = world_to_cell(spec, points[i].x, points[i].y);
    if (!cell) continue;
    for (int ch = 0; ch < feature_dim; ++ch) {
      out.at(cell->row, cell->col, ch) += features[i * feature_dim + ch];
    }
    out.at(cell->row, cell->col, feature_dim) += 1.0f;
  }
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      const float n = out.at(r, c, feature_dim);
      if (n > 0.0f) {
        for (int ch = 0; ch < feature_dim; ++ch) out.at(r, c, ch) /= n;
      }
    }
  }
  return out;
}

BevMap geometry_pillars(const std::vector<UnprojectedPoint>& points,
                        const GridSpec& spec, const std::vector<double>& height_bins) {
  if (height_bins.empty()) throw std::invalid_argument("geometry_pillars: empty bins");
  for (size_t i = 1; i < height_bins.size(); ++i) {
    if (!(height_bins[i] > height_bins[i - 1])) {
      throw std::invalid_argument("geometry_pillars: bins must be strictly increasing");
    }
  }

  const int nbins = static_cast<int>(height_bins.size()) + 1;
  BevMap out(spec, nbins + 1);  // histogram bins + max-height channel
  const int max_ch = nbins;
  for (const UnprojectedPoint& p : points) {
    const auto cell = world_to_cell(spec, p.x, p.y);
    if (!cell) continue;
    int bin = 0;
    while (bin < static_cast<int>(height_bins.size()) && p.z >= height_bins[bin]) ++bin;
    out.at(cell->row, cell->col, bin) += 1.0f;
    float& mx = out.at(cell->row, cell->col, max_ch);
    mx = std::max(mx, static_cast<float>(p.z));
  }
  for (int r = 0; r < spec.rows(); ++r) {
    for (int c = 0; c < spec.cols(); ++c) {
      float total = 0.0f;
      for (int b = 0; b < nbins; ++b) total += out.at(r, c, b);
      if (total > 0.0f) {
        for (int b = 0; b < nbins; ++b) out.at(r, c, b) /= total;
      }
    }
  }
  return out;
}

std::vector<Cell> trace_cells(const GridSpec& spec, double x0, double y0, double x1,
                              double y1) {
  std::vector<Cell> cells;
  const auto start = world_to_cell(spec, x0, y0);
  if (!start) return cells;  // traversal from outside the grid is not needed here

  // Amanatides & Woo voxel walk along the segment.
  const double dx = x1 - x0, dy = y1 - y0;
  int row = start->row, col = start->col;
  const int row_end_hint = static_cast<int>(std::floor((x1 + spec.bound) / spec.cell));
  const int col_end_hint = static_cast<int>(std::floor((y1 + spec.bound) / spec.cell));

  const int step_r = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_c = dy > 0 ? 1 : (dy < 0 ? -1 : 0);

  auto boundary_r = [&](int r) { return -spec.bound + (step_r > 0 ? r + 1 : r) * spec.cell; };
  auto boundary_c = [&](int c) { return -spec.bound + (step_c > 0 ? c + 1 : c) * spec.cell; };

  double t_max_r = step_r != 0 ? (boundary_r(row) - x0) / dx : kInf;
  double t_max_c = step_c != 0 ? (boundary_c(col) - y0) / dy : kInf;
  const double t_delta_r = step_r != 0 ? spec.cell / std::abs(dx) : kInf;
  const double t_delta_c = step_c != 0 ? spec.cell / std::abs(dy) : kInf;

  cells.push_back({row, col});
  while (true) {
    if (row == row_end_hint && col == col_end_hint) break;
    if (t_max_r >= 1.0 && t_max_c >= 1.0) break;  // segment ends inside this cell
    if (t_max_r < t_max_c) {
      row += step_r;
      t_max_r += t_delta_r;
    } else {
      col += step_c;
      t_max_c += t_delta_c;
    }
    if (row < 0 || row >= spec.rows() || col < 0 || col >= spec.cols()) break;
    cells.push_back({row, col});
  }
  return cells;
}

namespace {

// Marks the traversed cells of one ground-projected ray. The cell containing
// the hit itself is painted occupied for obstacle hits and left untouched for
// floor hits, so surface cells never get certified free.
void mark_ray(const GridSpec& spec, double ex, double ey, bool obstacle_hit,
              bool endpoint_in_grid, std::vector<uint8_t>& free_mark,
              std::vector<uint8_t>& occ_mark) {
  const std::vector<Cell> cells = trace_cells(spec, 0.0, 0.0, ex, ey);
  if (cells.empty()) return;
  const size_t n = cells.size();
  const bool last_is_endpoint = endpoint_in_grid;
  const size_t free_upto = last_is_endpoint ? n - 1 : n;
  for (size_t i = 0; i < free_upto; ++i) {
    free_mark[static_cast<size_t>(cells[i].row) * spec.cols() + cells[i].col] = 1;
  }
  if (last_is_endpoint) {
    const size_t idx = static_cast<size_t>(cells[n - 1].row) * spec.cols() + cells[n - 1].col;
    if (obstacle_hit) {
      occ_mark[idx] = 1;
    }
  }
}

}  // namespace

BevMap freespace_cue(const std::array<DepthImage, 4>& depth_views, const CameraRig& rig,
                     const CameraIntrinsics& intr, const GridSpec& spec) {
  std::vector<uint8_t> free_mark(spec.num_cells(), 0);
  std::vector<uint8_t> occ_mark(spec.num_cells(), 0);
  const float sentinel = static_cast<float>(rig.max_range);

  for (int view = 0; view < 4; ++view) {
    const DepthImage& img = depth_views[view];
    for (int v = 0; v < img.height; ++v) {
      for (int u = 0; u < img.width; ++u) {
        const float d = img.at(v, u);
        if (!(d > 0.0f)) continue;  // invalid pixel, no evidence
        double px, py, pz;
        if (d < sentinel) {
          unproject_pixel(u + 0.5, v + 0.5, d, intr, rig, view, px, py, pz);
          const bool obstacle_hit = pz > kObstacleHeight;
          const bool in_grid = world_to_cell(spec, px, py).has_value();
          mark_ray(spec, px, py, obstacle_hit, in_grid, free_mark, occ_mark);
        } else {
          // Miss: free along the ground projection out to max_range, but only
          // for rays that do not point upward.
          unproject_pixel(u + 0.5, v + 0.5, rig.max_range, intr, rig, view, px, py, pz);
          if (pz > rig.camera_height) continue;
          mark_ray(spec, px, py, false, false, free_mark, occ_mark);
          // A miss endpoint inside the grid is still free space.
          const auto end = world_to_cell(spec, px, py);
          if (end) {
            free_mark[static_cast<size_t>(end->row) * spec.cols() + end->col] = 1;
          }
        }
      }
    }
  }

  BevMap cue(spec, 1);
  for (int i = 0; i < spec.num_cells(); ++i) {
    cue.data[i] = occ_mark[i] ? kCueOccupied : (free_mark[i] ? kCueFree : kCueUnknown);
  }
  return cue;
}

}  // namespace bevnav
