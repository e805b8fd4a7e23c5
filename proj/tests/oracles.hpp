#pragma once

// Brute-force reference implementations used by tests only. These are kept
// deliberately independent of the library code paths they check.

#include <cmath>
#include <limits>
#include <vector>

#include "bevnav/geodesy.hpp"
#include "bevnav/grid.hpp"

namespace bevnav::oracle {

// Bellman-Ford style relaxation to a fixpoint over the 8-connected grid.
// Same edge costs as the production Dijkstra, so distances agree exactly.
inline std::vector<double> relaxation_distances(const TravGrid& trav, Cell source,
                                                bool transient_blocks = false) {
  const GridSpec& spec = trav.spec;
  const int rows = spec.rows(), cols = spec.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<size_t>(rows) * cols, inf);
  if (!trav.passable(source.row, source.col, transient_blocks)) return dist;
  dist[static_cast<size_t>(source.row) * cols + source.col] = 0.0;

  const double straight = spec.cell;
  const double diagonal = spec.cell * std::sqrt(2.0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const double d = dist[static_cast<size_t>(r) * cols + c];
        if (!std::isfinite(d)) continue;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int nr = r + dr, nc = c + dc;
            if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
            if (!trav.passable(nr, nc, transient_blocks)) continue;
            const double nd = d + ((dr != 0 && dc != 0) ? diagonal : straight);
            double& slot = dist[static_cast<size_t>(nr) * cols + nc];
            if (nd < slot) {
              slot = nd;
              changed = true;
            }
          }
        }
      }
    }
  }
  return dist;
}

/// Exhaustive nearest passable cell by squared integer center distance,
/// ties to the lowest row-major index.
inline Cell nearest_free_scan(const TravGrid& trav, Cell from) {
  const int rows = trav.spec.rows(), cols = trav.spec.cols();
  long best_d2 = -1;
  Cell best{0, 0};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (!trav.passable(r, c)) continue;
      const long dr = r - from.row, dc = c - from.col;
      const long d2 = dr * dr + dc * dc;
      if (best_d2 < 0 || d2 < best_d2) {
        best_d2 = d2;
        best = {r, c};
      }
    }
  }
  return best;
}

/// Random traversability grid with roughly the given blocked fraction.
template <typename RngT>
TravGrid random_grid(RngT& rng, const GridSpec& spec, double blocked_fraction,
                     double transient_fraction = 0.0) {
  TravGrid grid(spec);
  for (auto& s : grid.state) {
    const double roll = rng.uniform();
    if (roll < blocked_fraction) {
      s = CellState::StaticBlocked;
    } else if (roll < blocked_fraction + transient_fraction) {
      s = CellState::TransientBlocked;
    }
  }
  return grid;
}

}  // namespace bevnav::oracle
