#include "lanespline/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lanespline {

const std::vector<std::string>& category_names() {
  static const std::vector<std::string> names{"solid", "dashed", "double_solid", "curb"};
  return names;
}

int category_index(const std::string& name) {
  const auto& n = category_names();
  const auto it = std::find(n.begin(), n.end(), name);
  if (it == n.end()) throw InvalidInput("unknown lane category '" + name + "'");
  return static_cast<int>(it - n.begin());
}

void GtLane::validate() const {
  if (points.size() < 2) throw InvalidInput("a lane needs at least two points");
  if (visibility.size() != points.size())
    throw InvalidInput("lane visibility length differs from point count");
  category_index(category);
}

std::vector<Point3> GtLane::visible_points() const {
  std::vector<Point3> out;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (visibility[i]) out.push_back(points[i]);
  return out;
}

std::vector<std::vector<Point3>> SceneGroundTruth::point_lists() const {
  std::vector<std::vector<Point3>> out;
  out.reserve(lanes.size());
  for (const auto& l : lanes) out.push_back(l.points);
  return out;
}

const char* topology_name(Topology t) {
  switch (t) {
    case Topology::Merge:
      return "merge";
    case Topology::Split:
      return "split";
    default:
      return "parallel";
  }
}

Topology parse_topology(const std::string& s) {
  if (s == "parallel") return Topology::Parallel;
  if (s == "merge") return Topology::Merge;
  if (s == "split") return Topology::Split;
  throw InvalidConfiguration("unknown topology '" + s + "'");
}

void SceneSpec::validate() const {
  if (n_lanes < 1) throw InvalidConfiguration("scene needs at least one lane");
  if (!(lane_width > 0.0)) throw InvalidConfiguration("lane width must be positive");
  if (points_per_lane < 2) throw InvalidConfiguration("lanes need at least two points");
  if (!(y_end > y_start)) throw InvalidConfiguration("y_end must exceed y_start");
  if (occlusions.size() > static_cast<std::size_t>(n_lanes))
    throw InvalidConfiguration("more occlusion lists than lanes");
  if (!categories.empty() && categories.size() != static_cast<std::size_t>(n_lanes))
    throw InvalidConfiguration("category list must match the lane count");
  for (const auto& c : categories) category_index(c);
  for (double s : noise)
    if (s < 0.0) throw InvalidConfiguration("noise sigma must be nonnegative");
  if (topology != Topology::Parallel && n_lanes < 2)
    throw InvalidConfiguration("merge/split topology needs two lanes");
  if (arc_radius != 0.0 && std::abs(arc_radius) <= (y_end + lane_width * n_lanes))
    throw InvalidConfiguration("arc radius too small for the lane range");
  // Bounded surface over the evaluation area.
  for (double y : {y_start, y_end, 0.5 * (y_start + y_end)})
    for (double x : {-20.0, 20.0})
      if (std::abs(surface.height(x, y)) >= 10.0)
        throw InvalidConfiguration("surface height exceeds 10 m in range");
}

namespace {

struct Centerline {
  const SceneSpec& s;
  double x(double y) const {
    if (s.arc_radius != 0.0) {
      const double r = s.arc_radius;
      return s.centerline[0] + r - std::copysign(std::sqrt(r * r - y * y), r);
    }
    const auto& c = s.centerline;
    return c[0] + y * (c[1] + y * (c[2] + y * c[3]));
  }
  double slope(double y) const {
    if (s.arc_radius != 0.0) {
      const double r = s.arc_radius;
      return std::copysign(y / std::sqrt(r * r - y * y), r);
    }
    const auto& c = s.centerline;
    return c[1] + y * (2 * c[2] + 3 * y * c[3]);
  }
};

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

SceneGroundTruth gen_scene(const SceneSpec& spec) {
  spec.validate();
  SceneGroundTruth scene;
  scene.scenario = spec.scenario;
  scene.camera = spec.camera;
  scene.surface = spec.surface;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Centerline center{spec};
  const int n = spec.n_lanes;
  const int m = spec.points_per_lane;

  // Lateral offset of lane i at centerline station y.
  auto offset = [&](int i, double y) {
    const double base = (i - 0.5 * (n - 1)) * spec.lane_width;
    if (spec.topology == Topology::Parallel || i != n - 1) return base;
    const double nb = base - spec.lane_width;
    double sep = 0.0;
    if (spec.topology == Topology::Merge)
      sep = spec.topology_gap * (1.0 - smoothstep((y - spec.y_start) / (spec.topology_y - spec.y_start)));
    else
      sep = spec.topology_gap * smoothstep((y - spec.topology_y) / (spec.y_end - spec.topology_y));
    return nb + sep;
  };

  std::vector<std::vector<Point3>> clean(n, std::vector<Point3>(m));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < m; ++k) {
      const double ys = spec.y_start + (spec.y_end - spec.y_start) * k / (m - 1);
      const double slope = center.slope(ys);
      const double inv = 1.0 / std::sqrt(1.0 + slope * slope);
      const double o = offset(i, ys);
      Point3 p{center.x(ys) + o * inv, ys - o * slope * inv, 0.0};
      p.z = spec.surface.height(p.x, p.y);
      clean[i][k] = p;
    }
  }

  for (int i = 0; i < n; ++i) {
    GtLane lane;
    lane.category = spec.categories.empty() ? ((i == 0 || i == n - 1) ? "solid" : "dashed")
                                            : spec.categories[i];
    lane.points = clean[i];
    for (auto& p : lane.points) {
      p.x += spec.noise[0] * gauss(rng);
      p.y += spec.noise[1] * gauss(rng);
      p.z += spec.noise[2] * gauss(rng);
    }
    lane.visibility.assign(m, 1);
    if (static_cast<std::size_t>(i) < spec.occlusions.size())
      for (int k = 0; k < m; ++k)
        for (const auto& iv : spec.occlusions[i])
          if (clean[i][k].y >= iv.lo && clean[i][k].y <= iv.hi) lane.visibility[k] = 0;
    scene.lanes.push_back(std::move(lane));
  }

  // Merged / split stretches share the neighbor's points exactly.
  if (spec.topology != Topology::Parallel) {
    GtLane& last = scene.lanes[n - 1];
    const GtLane& nb = scene.lanes[n - 2];
    for (int k = 0; k < m; ++k) {
      const double ys = spec.y_start + (spec.y_end - spec.y_start) * k / (m - 1);
      const bool shared = spec.topology == Topology::Merge ? ys >= spec.topology_y : ys <= spec.topology_y;
      if (shared) last.points[k] = nb.points[k];
    }
  }
  for (auto& lane : scene.lanes)
    std::stable_sort(lane.points.begin(), lane.points.end(),
                     [](const Point3& a, const Point3& b) { return a.y < b.y; });
  return scene;
}

GtLane resample_lane(const GtLane& lane, int n) {
  lane.validate();
  if (static_cast<int>(lane.points.size()) == n) return lane;
  if (n < 2) throw InvalidConfiguration("resampling needs at least two points");
  std::vector<double> s(lane.points.size(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i)
    s[i] = s[i - 1] + std::hypot(lane.points[i].x - lane.points[i - 1].x,
                                 lane.points[i].y - lane.points[i - 1].y);
  GtLane out;
  out.category = lane.category;
  for (int k = 0; k < n; ++k) {
    const double target = s.back() * k / (n - 1);
    std::size_t j = std::upper_bound(s.begin(), s.end(), target) - s.begin();
    j = std::clamp<std::size_t>(j, 1, s.size() - 1);
    const double seg = s[j] - s[j - 1];
    const double u = seg > 0 ? std::clamp((target - s[j - 1]) / seg, 0.0, 1.0) : 0.0;
    out.points.push_back(lane.points[j - 1] + (lane.points[j] - lane.points[j - 1]) * u);
    out.visibility.push_back(u < 0.5 ? lane.visibility[j - 1] : lane.visibility[j]);
  }
  return out;
}

}  // namespace lanespline
