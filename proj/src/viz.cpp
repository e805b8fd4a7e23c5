#include "bevnav/viz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bevnav {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

Rgb trav_color(CellState s) {
  switch (s) {
    case CellState::Free: return {225, 225, 225};
    case CellState::StaticBlocked: return {45, 45, 45};
    case CellState::TransientBlocked: return {150, 150, 175};
  }
  return {225, 225, 225};
}

Rgb heat_color(double a, double threshold) {
  // Warm ramp from yellow at the threshold to red at 1.
  const double span = std::max(1e-9, 1.0 - threshold);
  const double t = std::clamp((a - threshold) / span, 0.0, 1.0);
  return {255, static_cast<uint8_t>(std::lround(210.0 * (1.0 - t) + 20.0 * t)), 20};
}

bool is_region_outline(const RegionMask& region, int r, int c) {
  if (!region.at(r, c)) return false;
  const int rows = region.spec.rows(), cols = region.spec.cols();
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  for (int k = 0; k < 4; ++k) {
    const int nr = r + dr[k], nc = c + dc[k];
    if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) return true;
    if (!region.at(nr, nc)) return true;
  }
  return false;
}

}  // namespace

ColorImage render_overlay(const TravGrid& trav, const BevMap* affordance,
                          const RegionMask* region, std::optional<Cell> argmax,
                          double threshold, int upscale) {
  if (upscale < 1) throw std::invalid_argument("render_overlay: upscale must be >= 1");
  const int rows = trav.spec.rows(), cols = trav.spec.cols();
  if (affordance && (affordance->channels != 1 || !(affordance->spec == trav.spec))) {
    throw std::invalid_argument("render_overlay: affordance grid mismatch");
  }
  if (region && !(region->spec == trav.spec)) {
    throw std::invalid_argument("render_overlay: region grid mismatch");
  }

  ColorImage img;
  img.width = cols * upscale;
  img.height = rows * upscale;
  img.view = -1;
  img.rgb.assign(static_cast<size_t>(img.width) * img.height * 3, 0);

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Rgb color = trav_color(trav.at(r, c));
      if (affordance) {
        const float a = affordance->at(r, c);
        if (a >= threshold) color = heat_color(a, threshold);
      }
      if (region && is_region_outline(*region, r, c)) color = {0, 200, 60};

      // Forward up, left to the image left.
      const int ir0 = (rows - 1 - r) * upscale;
      const int ic0 = (cols - 1 - c) * upscale;
      for (int dr = 0; dr < upscale; ++dr) {
        for (int dc = 0; dc < upscale; ++dc) {
          uint8_t* px = img.at(ir0 + dr, ic0 + dc);
          px[0] = color.r;
          px[1] = color.g;
          px[2] = color.b;
        }
      }
    }
  }

  if (argmax) {
    const int ir = (rows - 1 - argmax->row) * upscale + upscale / 2;
    const int ic = (cols - 1 - argmax->col) * upscale + upscale / 2;
    const int arm = 2 * upscale;
    for (int d = -arm; d <= arm; ++d) {
      for (auto [pr, pc] : {std::pair<int, int>{ir + d, ic}, {ir, ic + d}}) {
        if (pr < 0 || pr >= img.height || pc < 0 || pc >= img.width) continue;
        uint8_t* px = img.at(pr, pc);
        px[0] = 40;
        px[1] = 90;
        px[2] = 255;
      }
    }
  }
  return img;
}

}  // namespace bevnav
