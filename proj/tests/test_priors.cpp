#include <doctest.h>

#include <cmath>
#include <random>

#include "lanespline/gradient.hpp"
#include "lanespline/priors.hpp"
#include "lanespline/scene.hpp"
#include "test_support.hpp"

using namespace lanespline;
using lanespline::testing::arc_points;
using lanespline::testing::fit_curve;
using lanespline::testing::straight_curve;

namespace {

PriorLane<double> line(double x0, double y0, double x1, double y1, double z0 = 0.0, double z1 = 0.0) {
  return {straight_curve({x0, y0, z0}, {x1, y1, z1})};
}

PriorLane<double> yawed(double x0, double deg, double length) {
  const double r = deg2rad(deg);
  return line(x0, 0.0, x0 + length * std::sin(r), length * std::cos(r));
}

// Pair candidates on a grid that contains the parallelism sample grid.
PriorConfig aligned() {
  PriorConfig cfg;
  cfg.n_pair_candidates = 96;
  return cfg;
}

}  // namespace

TEST_CASE("normal pair between parallel lines") {
  const auto a = line(0, 0, 0, 100);
  const auto b = line(3.5, 0, 3.5, 100);
  const NormalPair np = normal_pair(a.curve, 0.5, b.curve, 101);
  CHECK(np.t_p_star == doctest::Approx(0.5));
  CHECK(std::abs(np.od) < 1e-9);
  CHECK(np.dist == doctest::Approx(3.5));
  const Point3 q = b.curve.eval(np.t_p_star);
  CHECK(q.x == doctest::Approx(3.5));
  CHECK(q.y == doctest::Approx(50.0));

  const NormalPair self = normal_pair(a.curve, 0.37, a.curve, 101);
  CHECK(self.dist < 100.0 / 100 * 1.5);
}

TEST_CASE("normal pair minimizes the absolute plane distance") {
  const auto a = line(0, 0, 0, 100);
  const auto b = yawed(2.0, 45.0, 140.0);
  for (double t : {0.1, 0.3, 0.5, 0.7}) {
    const NormalPair np = normal_pair(a.curve, t, b.curve, 100);
    // Oracle: exhaustive search over a 10x denser candidate grid.
    double dense = 1e9;
    for (double s : uniform_parameters(1000)) {
      const double od = dot(a.curve.unit_tangent(t), b.curve.eval(s) - a.curve.eval(t));
      dense = std::min(dense, std::abs(od));
    }
    // Resolution: largest y step between consecutive coarse candidates.
    double res = 0.0;
    const auto ts = uniform_parameters(100);
    for (std::size_t i = 1; i < ts.size(); ++i)
      res = std::max(res, b.curve.eval(ts[i]).y - b.curve.eval(ts[i - 1]).y);
    CHECK(std::abs(np.od) - dense <= res);
    CHECK(std::abs(np.od) <= res / 2 + 1e-12);
  }
}

TEST_CASE("parallelism of translated lines is zero") {
  const PriorConfig cfg;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 0; n < 10; ++n) {
    const double yaw = deg2rad(10.0 * u(rng));
    const Point3 a0{u(rng), 3.0, 0.0};
    const Point3 a1 = a0 + Point3{90.0 * std::sin(yaw), 90.0 * std::cos(yaw), 0.5 * u(rng)};
    const Point3 d{3.5, u(rng), u(rng)};
    const PriorLane<double> a{straight_curve(a0, a1)}, b{straight_curve(a0 + d, a1 + d)};
    CHECK(parallelism_loss(a, b, cfg) < 1e-10);
  }
}

TEST_CASE("parallelism of a 45 degree pair") {
  const PriorConfig cfg;
  const auto a = line(0, 0, 0, 100);
  const auto b = yawed(0.5, 45.0, 150.0);
  PriorConfig loose = cfg;
  loose.sigma_thr = 1e6;
  const auto gate = detail::gate_pairs(a, b, loose);
  REQUIRE(gate.pairs.size() == 20);
  CHECK(parallelism_loss(a, b, loose) == doctest::Approx(1.0 - std::cos(kPi / 4)).epsilon(1e-6));
  CHECK(std::abs(parallelism_loss(a, b, loose) - 0.29289) < 1e-5);
  // The spread of pair distances disables the pair at the default threshold.
  CHECK(gate.sigma > cfg.sigma_thr);
  CHECK(parallelism_loss(a, b, cfg) == 0.0);
}

TEST_CASE("parallelism is invariant under global yaw and translation") {
  const PriorConfig cfg;
  const auto a0 = fit_curve(arc_points(120.0, 90.0));
  auto b_pts = arc_points(123.5, 90.0);
  for (auto& p : b_pts) p.x -= 3.5;
  const auto b0 = fit_curve(b_pts);
  const double ref = parallelism_loss(PriorLane<double>{a0}, PriorLane<double>{b0}, cfg);
  CHECK(ref > 0.0);
  for (double deg : {5.0, -12.0}) {
    const double c = std::cos(deg2rad(deg)), s = std::sin(deg2rad(deg));
    auto rot = [&](const BSplineCurve<double>& k) {
      std::vector<Point3> cps;
      for (const auto& p : k.control_points()) cps.push_back({c * p.x - s * p.y + 4.0, s * p.x + c * p.y - 1.0, p.z + 0.5});
      return PriorLane<double>{BSplineCurve<double>(k.knots(), cps)};
    };
    CHECK(parallelism_loss(rot(a0), rot(b0), cfg) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("merge geometry is gated off by the pair spread") {
  SceneSpec spec;
  spec.n_lanes = 2;
  spec.topology = Topology::Merge;
  const auto scene = gen_scene(spec);
  const PriorLane<double> a{fit_curve(scene.lanes[0].points)};
  const PriorLane<double> b{fit_curve(scene.lanes[1].points)};
  const PriorConfig cfg;
  CHECK(detail::gate_pairs(b, a, cfg).sigma > cfg.sigma_thr);
  CHECK(parallelism_loss(b, a, cfg) == 0.0);
  CHECK(prior_terms(std::vector{a, b}, cfg).par == 0.0);
  PriorConfig loose = cfg;
  loose.sigma_thr = 1e6;
  CHECK(parallelism_loss(b, a, loose) > 0.0);
}

TEST_CASE("raising the spread threshold never removes pairs") {
  const auto a = line(0, 0, 0, 100);
  const auto b = yawed(1.0, 3.0, 100.0);
  double prev = -1.0;
  for (double thr : {0.1, 0.5, 1.0, 2.0, 5.0, 50.0}) {
    PriorConfig cfg;
    cfg.sigma_thr = thr;
    const double v = parallelism_loss(a, b, cfg);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("surface normals of flat neighbors point up") {
  const auto i = line(0, 0, 0, 100);
  const auto left = line(-3.5, 0, -3.5, 100);
  const auto right = line(3.5, 0, 3.5, 100);
  const PriorConfig cfg = aligned();
  // Parameters on the candidate grid, so partners lie in the normal plane.
  for (double t : {0.0, 0.4, 1.0}) {
    const Point3 nl = surface_normal(i, left, t, Side::Left, cfg);
    const Point3 nr = surface_normal(i, right, t, Side::Right, cfg);
    CHECK(norm(nl - Point3{0, 0, 1}) < 1e-12);
    CHECK(norm(nr - Point3{0, 0, 1}) < 1e-12);
  }
  CHECK_THROWS_AS(surface_normal(i, i, 0.4, Side::Left, cfg), DegenerateNormal);
}

TEST_CASE("surface normal on a banked plane") {
  const double bank = deg2rad(5.0);
  const double tb = std::tan(bank);
  const auto i = line(0, 0, 0, 100);
  const auto left = line(-3.5, 0, -3.5, 100, -3.5 * tb, -3.5 * tb);
  const Point3 n = surface_normal(i, left, 0.4, Side::Left, aligned());
  const Point3 analytic{-std::sin(bank), 0.0, std::cos(bank)};
  CHECK(std::acos(std::min(1.0, dot(n, analytic))) < 1e-6);
}

TEST_CASE("smoothness examples") {
  const PriorConfig cfg = aligned();
  const auto h = line(-3.5, 0, -3.5, 100);
  const auto i = line(0, 0, 0, 100);
  const auto j = line(3.5, 0, 3.5, 100);
  CHECK(smoothness_loss(h, i, j, cfg) < 1e-12);

  const double tb = std::tan(deg2rad(10.0));
  const auto jb = line(3.5, 0, 3.5, 100, 3.5 * tb, 3.5 * tb);
  CHECK(smoothness_loss(h, i, jb, cfg) == doctest::Approx(1.0 - std::cos(deg2rad(10.0))).epsilon(1e-9));
  CHECK(std::abs(smoothness_loss(h, i, jb, cfg) - 0.01519) < 1e-5);
}

TEST_CASE("curvature floor of a straight line") {
  const PriorConfig cfg;
  CHECK(curvature_loss(line(0, 0, 0, 100), cfg) == doctest::Approx(5.1).epsilon(1e-12));
  CHECK(curvature_loss(line(1, 0, 7, 100, 0, 3), cfg) == doctest::Approx(5.1).epsilon(1e-12));
}

TEST_CASE("arc curvature matches the inverse radius") {
  PriorConfig raw;
  raw.kappa_xy = 0.0;
  raw.kappa_z = 0.0;
  for (double r : {50.0, 100.0, 500.0}) {
    const PriorLane<double> arc{fit_curve(arc_points(r, 60.0))};
    const double k = curvature_loss(arc, raw);
    CHECK(std::abs(k - 1.0 / r) < 0.02 / r);
    CHECK(curvature_loss(arc, PriorConfig{}) == doctest::Approx(5.1).epsilon(1e-12));
  }
}

TEST_CASE("curvature above the floor carries gradient") {
  // Tight S-curve: alternating lateral control points over a short span.
  std::vector<Point3> cps;
  for (int k = 0; k < 10; ++k) cps.push_back({(k % 2 ? 0.15 : -0.15), 0.2 * k, 0.0});
  const KnotVector kv = make_clamped_knots(10, 3);
  PriorConfig cfg;
  cfg.kappa_xy = 0.5;
  auto f = [&](auto p) {
    using T = typename decltype(p)::value_type;
    std::vector<Vec3<T>> q(10);
    for (int k = 0; k < 10; ++k) q[k] = {p[k], T(cps[k].y), T(0.0)};
    return curvature_loss(PriorLane<T>{BSplineCurve<T>(kv, q)}, cfg);
  };
  std::vector<double> x0(10);
  for (int k = 0; k < 10; ++k) x0[k] = cps[k].x;
  CHECK(f(std::span<const double>(x0)) > cfg.kappa_xy + cfg.kappa_z);
  const auto g = gradient([&](std::span<const Grad> p) { return f(p); }, std::span<const double>(x0));
  const auto fd = finite_difference_gradient([&](std::span<const double> p) { return f(p); },
                                             std::span<const double>(x0));
  for (int k = 0; k < 10; ++k) {
    CHECK(std::abs(g[k]) > 1e-6);
    CHECK(g[k] == doctest::Approx(fd[k]).epsilon(1e-4));
  }
}

TEST_CASE("prior composition") {
  PriorConfig cfg = aligned();
  const auto h = line(-3.5, 0, -3.5, 100);
  const auto i = line(0, 0, 0, 100);
  const auto j = line(3.5, 0, 3.5, 100);
  const auto single = prior_terms(std::vector{i}, cfg);
  CHECK(single.par == 0.0);
  CHECK(single.sm == 0.0);
  CHECK(single.total == doctest::Approx(5.1));
  const auto three = prior_terms(std::vector{h, i, j}, cfg);
  CHECK(three.par < 1e-12);
  CHECK(three.sm < 1e-12);
  CHECK(three.total == doctest::Approx(3 * 5.1));
  cfg.lambda_par = cfg.lambda_sm = cfg.lambda_curv = 0.0;
  CHECK(prior_loss(std::vector{h, i, j}, cfg) == 0.0);
}

TEST_CASE("priors stay above their floors and are stable under resampling") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  for (int n = 0; n < 10; ++n) {
    std::vector<PriorLane<double>> lanes;
    for (int l = 0; l < 3; ++l) {
      auto pts = arc_points(150.0 + 30 * n, 90.0);
      for (auto& p : pts) p.x += 3.5 * l + 0.002 * l * p.y;
      auto c = fit_curve(pts);
      std::vector<Point3> cps = c.control_points();
      for (auto& q : cps) q.z += 0.05 * g(rng);
      lanes.push_back({BSplineCurve<double>(c.knots(), cps)});
    }
    PriorConfig cfg;
    const auto b = prior_terms(lanes, cfg);
    CHECK(b.par >= 0.0);
    CHECK(b.sm >= 0.0);
    CHECK(b.curv >= 3 * (cfg.kappa_xy + cfg.kappa_z) - 1e-12);
    PriorConfig dense = cfg;
    dense.n_samples_par *= 2;
    dense.n_samples_curv *= 2;
    dense.n_pair_candidates *= 2;
    const auto d = prior_terms(lanes, dense);
    // Near-zero parallelism is dominated by partner quantization; bound it absolutely.
    CHECK(std::abs(d.par - b.par) < 1e-4);
    CHECK(std::abs(d.curv - b.curv) <= 0.01 * b.curv);
    CHECK(std::abs(d.total - b.total) <= 0.01 * b.total);
  }
}

namespace {

// Three lanes along +y; p holds alpha then beta (10 each) per lane.
template <class T>
T three_lane_prior(std::span<const T> p, const PriorConfig& cfg) {
  const KnotVector kv = make_clamped_knots(10, 3);
  std::vector<PriorLane<T>> lanes;
  for (int l = 0; l < 3; ++l) {
    std::vector<Vec3<T>> cps(10);
    for (int k = 0; k < 10; ++k)
      cps[k] = {T(3.5 * l) + p[20 * l + k], T(3.0 + 100.0 * k / 9), p[20 * l + 10 + k]};
    lanes.push_back({BSplineCurve<T>(kv, cps)});
  }
  return prior_loss(lanes, cfg);
}

}  // namespace

TEST_CASE("prior gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.2);
  PriorConfig cfg;
  cfg.kappa_xy = 0.0;
  cfg.kappa_z = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x0(60);
    for (auto& v : x0) v = g(rng);
    const auto ag = gradient([&](std::span<const Grad> p) { return three_lane_prior(p, cfg); },
                             std::span<const double>(x0));
    std::vector<long double> xl(x0.begin(), x0.end());
    for (std::size_t k = 0; k < x0.size(); ++k) {
      auto xp = xl, xm = xl;
      xp[k] += 1e-6L;
      xm[k] -= 1e-6L;
      const long double up = three_lane_prior(std::span<const long double>(xp), cfg);
      const long double dn = three_lane_prior(std::span<const long double>(xm), cfg);
      const double fd = static_cast<double>((up - dn) / 2e-6L);
      const double m = std::max(std::abs(ag[k]), std::abs(fd));
      if (m > 1e-8) CHECK(std::abs(ag[k] - fd) / m < 1e-4);
    }
  }
}
