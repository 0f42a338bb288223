#pragma once

// Proposal to ground-truth matching: normalized unilateral chamfer distance
// plus orientation cost, thresholded.

#include <span>
#include <vector>

#include "lanespline/lane_model.hpp"

namespace lanespline {

struct MatchConfig {
  double lambda_ucd = 0.5;
  double lambda_cosd = 0.5;
  double l_thr = 0.4;
  double d_max = 10.0;  // m, normalizes the chamfer distance to [0, 1]
};

// Mean top-view distance from the ground-truth points to the proposal segment,
// divided by d_max and clamped to 1.
double ucd(const LaneProposal& p, std::span<const Point3> gt, const MatchConfig& cfg = {});

// (1 - cos theta) / 2 between the proposal direction and the gt chord
// (last point minus first point) in the x-y plane.
double cosd(const LaneProposal& p, std::span<const Point3> gt);

double match_cost(const LaneProposal& p, std::span<const Point3> gt, const MatchConfig& cfg = {});

struct Assignment {
  int proposal = 0;
  int gt = 0;
  double cost = 0.0;
};

// Every proposal whose best cost is below l_thr is assigned to that gt (lowest
// cost, then lowest gt index). Ordered by proposal index.
std::vector<Assignment> assign(const std::vector<LaneProposal>& proposals,
                               const std::vector<std::vector<Point3>>& gts,
                               const MatchConfig& cfg = {});

}  // namespace lanespline
