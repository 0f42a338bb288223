#pragma once

// Ground-truth scenes and the synthetic scene generator.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lanespline/lane_model.hpp"
#include "lanespline/spatial_lift.hpp"

namespace lanespline {

// Lane categories understood by the category loss and the evaluation.
const std::vector<std::string>& category_names();
int category_index(const std::string& name);  // throws InvalidInput

struct GtLane {
  std::vector<Point3> points;             // ordered by y
  std::vector<std::uint8_t> visibility;   // 1 visible, 0 occluded
  std::string category = "dashed";

  void validate() const;
  std::vector<Point3> visible_points() const;
};

// z = a*y + b*y^2 + c*x
struct SurfaceCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double height(double x, double y) const { return a * y + b * y * y + c * x; }
};

struct SceneGroundTruth {
  std::string scenario = "parallel";
  CameraModel camera;
  SurfaceCoefficients surface;
  std::vector<GtLane> lanes;
  std::optional<Tensor3> features;
  std::optional<Tensor3> depth;

  std::vector<std::vector<Point3>> point_lists() const;
};

enum class Topology { Parallel, Merge, Split };

struct SceneSpec {
  int n_lanes = 3;
  double lane_width = 3.5;
  // Centerline x(y) = c0 + c1 y + c2 y^2 + c3 y^3, or a circular arc of the
  // given signed radius through (c0, 0) heading +y when arc_radius != 0.
  std::array<double, 4> centerline{0.0, 0.0, 0.0, 0.0};
  double arc_radius = 0.0;
  SurfaceCoefficients surface;
  std::vector<std::vector<Interval>> occlusions;  // per lane, y intervals
  std::array<double, 3> noise{0.0, 0.0, 0.0};     // sigma per axis, m
  Topology topology = Topology::Parallel;
  double topology_y = 50.0;    // merge point / split point
  double topology_gap = 8.0;   // separation far from the merge/split point
  std::vector<std::string> categories;  // per lane; empty -> defaults
  std::uint64_t seed = 0;
  double y_start = 5.0;
  double y_end = 100.0;
  int points_per_lane = 20;
  CameraModel camera;
  std::string scenario = "parallel";

  void validate() const;
};

SceneGroundTruth gen_scene(const SceneSpec& spec);

// Uniform resampling in top-view arc length; visibility is taken from the
// nearest original point.
GtLane resample_lane(const GtLane& lane, int n);

const char* topology_name(Topology t);
Topology parse_topology(const std::string& s);

}  // namespace lanespline
