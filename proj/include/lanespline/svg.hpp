#pragma once

// Hand-written SVG plots for offline inspection.

#include <string>
#include <vector>

#include "lanespline/scene.hpp"
#include "lanespline/spatial_lift.hpp"

namespace lanespline {

// Top view (x over y) and side view (z over y); ground truth in blue, fitted
// lanes in red, occluded ground truth dashed.
std::string lanes_svg(const std::vector<GtLane>& gt, const std::vector<GtLane>& fitted,
                      const std::string& title);

// BEV height map as a heat grid; invalid cells grey.
std::string grid_svg(const BevGrid& grid, const std::string& title);

}  // namespace lanespline
