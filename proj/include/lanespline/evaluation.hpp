#pragma once

// Lane detection metric: per-lane matching on a shared y grid, F1,
// precision, recall, near/far x and z errors and category accuracy.

#include <span>
#include <string>
#include <vector>

#include "lanespline/scene.hpp"

namespace lanespline {

struct EvalConfig {
  double y_min = 0.0;
  double y_max = 100.0;
  double y_step = 1.0;
  double match_distance = 1.5;   // m
  double match_fraction = 0.75;  // share of joint points below match_distance
  double near_far_split = 40.0;  // near: [y_min, split), far: [split, y_max]
  int exhaustive_limit = 8;      // lanes per side up to which pairing is exact

  void validate() const;
  std::vector<double> y_grid() const;
};

struct LaneSamples {
  std::vector<double> x;
  std::vector<double> z;
  std::vector<std::uint8_t> covered;
};

// Linear interpolation of x and z at each grid y within the y-span of the
// lane's visible points.
LaneSamples sample_at_y(std::span<const Point3> points, std::span<const double> y_grid);
LaneSamples sample_at_y(const GtLane& lane, std::span<const double> y_grid);

struct EvalResult {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double category_accuracy = 0.0;
  double x_near = 0.0;
  double x_far = 0.0;
  double z_near = 0.0;
  double z_far = 0.0;
  int tp = 0;
  int n_pred = 0;
  int n_gt = 0;
};

struct PairCost {
  std::vector<std::vector<double>> cost;  // gt x pred mean distance, inf if disjoint
};

PairCost pair_costs(const std::vector<LaneSamples>& gt, const std::vector<LaneSamples>& pred);

// Pairings as (gt, pred) index pairs. Greedy repeatedly takes the cheapest
// finite entry; optimal maximizes the number of pairs, then minimizes the
// summed cost.
std::vector<std::pair<int, int>> greedy_pairing(const PairCost& c);
std::vector<std::pair<int, int>> optimal_pairing(const PairCost& c);

EvalResult evaluate(const std::vector<GtLane>& pred, const std::vector<GtLane>& gt,
                    const EvalConfig& cfg = {});

struct SceneRow {
  std::string scene;
  std::string scenario;
  EvalResult result;
};

// Header plus one row per scene plus one mean row per scenario tag and an
// overall mean row.
std::string eval_csv(const std::vector<SceneRow>& rows);

}  // namespace lanespline
