#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bevnav {

// Ego-centric BEV lattice. x is forward, y is left. The grid covers
// [-bound, +bound) on both axes, half-open at the upper edge, with
// square cells of side `cell`. Row index follows x, column follows y.
struct GridSpec {
  double bound = 6.4;  // meters
  double cell = 0.1;   // meters

  int rows() const { return static_cast<int>(std::lround(2.0 * bound / cell)); }
  int cols() const { return rows(); }
  int num_cells() const { return rows() * cols(); }

  void validate() const {
    if (!(bound > 0.0) || !(cell > 0.0)) {
      throw std::invalid_argument("GridSpec: bound and cell must be positive");
    }
    const double n = 2.0 * bound / cell;
    if (std::abs(n - std::lround(n)) > 1e-9 || std::lround(n) <= 0) {
      throw std::invalid_argument("GridSpec: 2*bound/cell must be a positive integer");
    }
  }

  bool operator==(const GridSpec& o) const { return bound == o.bound && cell == o.cell; }
};

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
};

/// Cell containing metric point (x, y), or nullopt outside [-bound, +bound).
inline std::optional<Cell> world_to_cell(const GridSpec& spec, double x, double y) {
  if (x < -spec.bound || x >= spec.bound || y < -spec.bound || y >= spec.bound) {
    return std::nullopt;
  }
  auto idx = [&](double v) {
    int i = static_cast<int>(std::floor((v + spec.bound) / spec.cell));
    // Guard the floor against float dust right at the half-open edges.
    if (i < 0) i = 0;
    if (i >= spec.rows()) i = spec.rows() - 1;
    return i;
  };
  return Cell{idx(x), idx(y)};
}

/// Metric center of a cell. Inverse of world_to_cell on cell centers.
inline void cell_center(const GridSpec& spec, int row, int col, double& x, double& y) {
  if (row < 0 || row >= spec.rows() || col < 0 || col >= spec.cols()) {
    throw std::out_of_range("cell_center: cell index out of range");
  }
  x = -spec.bound + (row + 0.5) * spec.cell;
  y = -spec.bound + (col + 0.5) * spec.cell;
}

// Channelled per-cell float map on a GridSpec (features, cues, scores).
// Data is row-major [row][col][channel].
struct BevMap {
  GridSpec spec;
  int channels = 1;
  std::vector<float> data;

  BevMap() = default;
  BevMap(const GridSpec& s, int ch) : spec(s), channels(ch) {
    data.assign(static_cast<size_t>(s.num_cells()) * ch, 0.0f);
  }

  float& at(int row, int col, int ch = 0) {
    return data[(static_cast<size_t>(row) * spec.cols() + col) * channels + ch];
  }
  float at(int row, int col, int ch = 0) const {
    return data[(static_cast<size_t>(row) * spec.cols() + col) * channels + ch];
  }
};

// Binary container: 32-byte header (magic, rows, cols, channels, reserved)
// followed by little-endian float32 payload in row-major order.
void save_bevmap(const BevMap& map, const std::string& path);
BevMap load_bevmap(const std::string& path);

}  // namespace bevnav
