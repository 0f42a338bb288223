#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "lanespline/scene.hpp"

using namespace lanespline;

namespace {

double polyline_distance_xy(const std::vector<Point3>& line, const Point3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Point3 &a = line[i - 1], &b = line[i];
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double s = std::clamp(((q.x - a.x) * ex + (q.y - a.y) * ey) / (ex * ex + ey * ey), 0.0, 1.0);
    best = std::min(best, std::hypot(a.x + s * ex - q.x, a.y + s * ey - q.y));
  }
  return best;
}

}  // namespace

TEST_CASE("straight flat parallel lanes") {
  const auto scene = gen_scene(SceneSpec{});
  REQUIRE(scene.lanes.size() == 3);
  const double xs[] = {-3.5, 0.0, 3.5};
  for (int l = 0; l < 3; ++l) {
    const auto& lane = scene.lanes[l];
    CHECK(lane.points.size() == 20);
    for (const auto& p : lane.points) {
      CHECK(p.x == doctest::Approx(xs[l]).epsilon(1e-12));
      CHECK(p.z == 0.0);
    }
    CHECK(lane.points.front().y == doctest::Approx(5.0));
    CHECK(lane.points.back().y == doctest::Approx(100.0));
    CHECK(std::all_of(lane.visibility.begin(), lane.visibility.end(), [](auto v) { return v == 1; }));
  }
  CHECK(scene.lanes[0].category == "solid");
  CHECK(scene.lanes[1].category == "dashed");
  CHECK(scene.lanes[2].category == "solid");
}

TEST_CASE("graded surface heights") {
  SceneSpec spec;
  spec.surface.a = 0.03;
  spec.centerline = {0.5, 0.01, 2e-4, 0.0};
  for (const auto& lane : gen_scene(spec).lanes)
    for (const auto& p : lane.points) CHECK(std::abs(p.z - 0.03 * p.y) < 1e-12);

  spec.surface = {0.01, 2e-4, 0.05};
  for (const auto& lane : gen_scene(spec).lanes)
    for (const auto& p : lane.points) CHECK(std::abs(p.z - spec.surface.height(p.x, p.y)) < 1e-12);
}

TEST_CASE("generation is deterministic in the seed") {
  SceneSpec spec;
  spec.noise = {0.1, 0.1, 0.05};
  spec.seed = 42;
  const auto a = gen_scene(spec), b = gen_scene(spec);
  spec.seed = 43;
  const auto c = gen_scene(spec);
  bool differs = false;
  for (std::size_t l = 0; l < a.lanes.size(); ++l)
    for (std::size_t i = 0; i < a.lanes[l].points.size(); ++i) {
      CHECK(a.lanes[l].points[i].x == b.lanes[l].points[i].x);
      CHECK(a.lanes[l].points[i].y == b.lanes[l].points[i].y);
      CHECK(a.lanes[l].points[i].z == b.lanes[l].points[i].z);
      differs |= a.lanes[l].points[i].x != c.lanes[l].points[i].x;
    }
  CHECK(differs);
}

TEST_CASE("adjacent lanes keep the lane width on curves") {
  for (double r : {50.0, 100.0, -200.0, 1000.0}) {
    SceneSpec spec;
    spec.n_lanes = 4;
    spec.arc_radius = r;
    spec.y_end = std::min(100.0, std::abs(r) - 15.0);
    spec.points_per_lane = 400;
    spec.surface.a = 0.02;
    const auto scene = gen_scene(spec);
    for (int l = 0; l + 1 < 4; ++l) {
      const auto& a = scene.lanes[l].points;
      const auto& b = scene.lanes[l + 1].points;
      // Interior points only: the end of the neighbor polyline is cut by y.
      for (std::size_t i = 40; i + 40 < a.size(); i += 20)
        CHECK(std::abs(polyline_distance_xy(b, a[i]) - 3.5) < 0.035);
    }
  }
  SceneSpec poly;
  poly.centerline = {0.0, 0.05, 1e-3, -5e-6};
  poly.points_per_lane = 400;
  const auto scene = gen_scene(poly);
  for (std::size_t i = 40; i + 40 < scene.lanes[0].points.size(); i += 20)
    CHECK(std::abs(polyline_distance_xy(scene.lanes[1].points, scene.lanes[0].points[i]) - 3.5) < 0.035);
}

TEST_CASE("occlusion flags partition points by interval") {
  SceneSpec spec;
  spec.occlusions = {{}, {{30.0, 60.0}}, {{10.0, 20.0}, {80.0, 95.0}}};
  spec.noise = {0.05, 0.05, 0.02};
  const auto scene = gen_scene(spec);
  const auto clean = [&] {
    SceneSpec s = spec;
    s.noise = {0, 0, 0};
    return gen_scene(s);
  }();
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& lane = scene.lanes[l];
    CHECK(lane.points.size() == 20);
    for (std::size_t i = 0; i < lane.points.size(); ++i) {
      const double y = clean.lanes[l].points[i].y;
      bool occluded = false;
      for (const auto& iv : spec.occlusions[l]) occluded |= iv.lo <= y && y <= iv.hi;
      CHECK(lane.visibility[i] == (occluded ? 0 : 1));
    }
    for (std::size_t i = 1; i < lane.points.size(); ++i) CHECK(lane.points[i].y >= lane.points[i - 1].y);
  }
}

TEST_CASE("merge and split share the neighbor past the topology point") {
  for (Topology t : {Topology::Merge, Topology::Split}) {
    SceneSpec spec;
    spec.topology = t;
    const auto scene = gen_scene(spec);
    const auto& last = scene.lanes[2].points;
    const auto& nb = scene.lanes[1].points;
    int shared = 0;
    for (std::size_t i = 0; i < last.size(); ++i) {
      const bool in = t == Topology::Merge ? last[i].y >= 50.0 : last[i].y <= 50.0;
      if (in) {
        ++shared;
        CHECK(last[i].x == nb[i].x);
      }
    }
    CHECK(shared > 5);
    const std::size_t far = t == Topology::Merge ? 0 : last.size() - 1;
    CHECK(last[far].x - nb[far].x == doctest::Approx(spec.topology_gap).epsilon(0.05));
    CHECK(topology_name(parse_topology(topology_name(t))) == std::string(topology_name(t)));
  }
}

TEST_CASE("invalid specs are rejected") {
  SceneSpec s;
  s.lane_width = 0.0;
  CHECK_THROWS_AS(gen_scene(s), InvalidConfiguration);
  s = SceneSpec{};
  s.surface.a = 0.2;
  CHECK_THROWS_AS(gen_scene(s), InvalidConfiguration);
  s = SceneSpec{};
  s.n_lanes = 0;
  CHECK_THROWS_AS(gen_scene(s), InvalidConfiguration);
  s = SceneSpec{};
  s.categories = {"solid"};
  CHECK_THROWS_AS(gen_scene(s), InvalidConfiguration);
  CHECK_THROWS_AS(parse_topology("fork"), InvalidConfiguration);
}

TEST_CASE("arc length resampling") {
  SceneSpec spec;
  spec.arc_radius = 80.0;
  spec.y_end = 60.0;
  spec.occlusions = {{{20.0, 40.0}}, {}, {}};
  const auto lane = gen_scene(spec).lanes[0];
  CHECK(resample_lane(lane, 20).points.size() == 20);
  const auto r = resample_lane(lane, 50);
  REQUIRE(r.points.size() == 50);
  CHECK(norm(r.points.front() - lane.points.front()) < 1e-12);
  CHECK(norm(r.points.back() - lane.points.back()) < 1e-12);
  double step = std::hypot(r.points[1].x - r.points[0].x, r.points[1].y - r.points[0].y);
  for (std::size_t i = 2; i < r.points.size(); ++i)
    CHECK(std::hypot(r.points[i].x - r.points[i - 1].x, r.points[i].y - r.points[i - 1].y) ==
          doctest::Approx(step).epsilon(0.01));
  CHECK(r.category == lane.category);
  int hidden = 0;
  for (auto v : r.visibility) hidden += v == 0;
  CHECK(hidden > 10);
}
