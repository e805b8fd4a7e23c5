#pragma once

#include <optional>

#include "bevnav/geodesy.hpp"
#include "bevnav/grid.hpp"
#include "bevnav/render.hpp"

namespace bevnav {

/// Default display threshold for affordance overlays.
constexpr double kOverlayThreshold = 0.40;

/// Top-down overlay: traversability in grayscale, affordance cells at or
/// above the threshold in a warm ramp, the target region outlined in green,
/// and a marker on the argmax cell. Forward (+x) points up, left (+y) is to
/// the image left. Output is rows*upscale by cols*upscale.
ColorImage render_overlay(const TravGrid& trav, const BevMap* affordance,
                          const RegionMask* region, std::optional<Cell> argmax,
                          double threshold = kOverlayThreshold, int upscale = 4);

}  // namespace bevnav
