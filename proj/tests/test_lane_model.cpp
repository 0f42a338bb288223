#include <doctest.h>

#include <cmath>
#include <random>

#include "lanespline/lane_model.hpp"

using namespace lanespline;

namespace {

LaneProposal straight_up(double x = 0.0) {
  return make_proposal(x, 0.0, BevRange{}, make_clamped_knots(10, 3));
}

}  // namespace

TEST_CASE("default proposal set has 64 proposals of 10 points") {
  const auto set = make_proposal_set(ProposalSetConfig::defaults());
  CHECK(set.size() == 64);
  for (const auto& p : set) {
    CHECK(p.base.size() == 10);
    // Evenly spaced, collinear, unit normal orthogonal to the segment.
    const Point3 d = p.direction();
    for (std::size_t i = 1; i < p.base.size(); ++i) {
      CHECK(norm(p.base[i] - p.base[i - 1]) == doctest::Approx(p.length() / 9).epsilon(1e-12));
      CHECK(norm(cross(p.base[i] - p.start(), d)) < 1e-9);
      CHECK(p.base[i].z == 0.0);
    }
    CHECK(std::hypot(p.nx, p.ny) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p.nx * d.x + p.ny * d.y) < 1e-15);
    CHECK(p.start().x >= -10.0 - 1e-9);
    CHECK(p.end().x <= 10.0 + 1e-9);
    CHECK(p.end().y <= 103.0 + 1e-9);
  }
}

TEST_CASE("single straight proposal spans the longitudinal range") {
  const auto p = straight_up();
  for (int i = 0; i < 10; ++i) {
    CHECK(p.base[i].x == doctest::Approx(0.0));
    CHECK(p.base[i].y == doctest::Approx(3.0 + i * 100.0 / 9).epsilon(1e-12));
  }
}

TEST_CASE("sideways proposal is clipped to the range and keeps K points") {
  const auto p = make_proposal(-5.0, 90.0, BevRange{}, make_clamped_knots(10, 3));
  CHECK(p.base.size() == 10);
  CHECK(p.start().x == doctest::Approx(-5.0));
  CHECK(p.end().x == doctest::Approx(10.0));
  CHECK(p.end().y == doctest::Approx(3.0));
}

TEST_CASE("invalid proposal configurations") {
  ProposalSetConfig cfg;
  CHECK_THROWS_AS(make_proposal_set(cfg), InvalidConfiguration);
  CHECK_THROWS_AS(make_proposal(10.0, 45.0, BevRange{}, make_clamped_knots(10, 3)), InvalidConfiguration);
}

TEST_CASE("zero deflection reproduces the proposal segment") {
  const auto set = make_proposal_set(ProposalSetConfig::defaults());
  const auto& p = set[37];
  const auto h = LaneHypothesis::zeros(37, 10, 4);
  const auto c = realize_curve(p, h);
  for (int i = 0; i <= 50; ++i) {
    const Point3 q = c.eval(i / 50.0);
    CHECK(norm(cross(q - p.start(), p.direction())) < 1e-9);
    CHECK(q.z == 0.0);
  }
  CHECK(norm(c.eval(0.0) - p.start()) < 1e-12);
  CHECK(norm(c.eval(1.0) - p.end()) < 1e-9);
}

TEST_CASE("uniform deflections shift the curve") {
  const auto p = straight_up();
  auto h = LaneHypothesis::zeros(0, 10, 4);
  std::fill(h.alpha.begin(), h.alpha.end(), 0.5);
  const auto c = realize_curve(p, h);
  const auto base = realize_curve(p, LaneHypothesis::zeros(0, 10, 4));
  for (int i = 0; i <= 20; ++i) CHECK(norm(c.eval(i / 20.0) - base.eval(i / 20.0) - Point3{0.5, 0, 0}) < 1e-12);

  auto v = LaneHypothesis::zeros(0, 10, 4);
  std::fill(v.beta.begin(), v.beta.end(), 1.0);
  const auto cz = realize_curve(p, v);
  for (int i = 0; i <= 20; ++i) {
    const double t = i / 20.0;
    CHECK(cz.eval(t).z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cz.eval(t).x == doctest::Approx(base.eval(t).x).epsilon(1e-12));
    CHECK(cz.eval(t).y == doctest::Approx(base.eval(t).y).epsilon(1e-12));
  }
}

TEST_CASE("deflection stays in the two normal directions") {
  const auto set = make_proposal_set(ProposalSetConfig::defaults());
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  for (const auto& p : set) {
    std::vector<double> a(10), b(10);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    const auto c = realize_curve<double>(p, a, b);
    for (int k = 0; k < 10; ++k) {
      const Point3 d = c.control_points()[k] - p.base[k];
      // Component along the segment direction vanishes.
      CHECK(std::abs(dot(d, p.direction())) < 1e-12);
      CHECK(d.x == doctest::Approx(a[k] * p.nx));
      CHECK(d.y == doctest::Approx(a[k] * p.ny));
      CHECK(d.z == doctest::Approx(b[k]));
    }
  }
  std::vector<double> short_a(9);
  CHECK_THROWS_AS(realize_curve<double>(set[0], short_a, short_a), InvalidConfiguration);
}

TEST_CASE("visibility probability") {
  const auto p = straight_up();
  auto h = LaneHypothesis::zeros(0, 10, 4);
  for (int i = 0; i <= 10; ++i) CHECK(visibility_prob(p, h, i / 10.0) == 0.5);
  std::fill(h.gamma.begin(), h.gamma.end(), 10.0);
  for (int i = 0; i <= 10; ++i) CHECK(visibility_prob(p, h, i / 10.0) > 0.9999);
  CHECK_THROWS_AS(visibility_prob(p, h, 1.2), DomainError);
}

TEST_CASE("visible range crossing located by bisection") {
  const auto p = straight_up();
  std::vector<double> g(10);
  for (int k = 0; k < 10; ++k) g[k] = -5.0 + 10.0 * k / 9.0;
  const ScalarSpline<double> v(p.knots, g);
  const auto iv = visible_intervals(v);
  REQUIRE(iv.size() == 1);
  CHECK(std::abs(v.eval(iv[0].lo)) < 1e-9);
  CHECK(iv[0].hi == 1.0);
  // Linear coefficients give a linear function: crossing at t = 0.5.
  CHECK(iv[0].lo == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("visible span bridges an occluded gap") {
  const auto p = straight_up();
  const ScalarSpline<double> v(p.knots, {3, 3, 3, 3, -4, -4, 3, 3, 3, 3});
  const auto iv = visible_intervals(v);
  REQUIRE(iv.size() == 2);
  const Interval span = visible_span(v);
  CHECK(span.lo == 0.0);
  CHECK(span.hi == 1.0);
  const ScalarSpline<double> none(p.knots, std::vector<double>(10, -1.0));
  const Interval e = visible_span(none);
  CHECK(e.lo > e.hi);
}

TEST_CASE("visibility is monotone in gamma") {
  const auto p = straight_up();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int n = 0; n < 50; ++n) {
    auto h = LaneHypothesis::zeros(0, 10, 4);
    for (auto& x : h.gamma) x = g(rng);
    auto up = h;
    up.gamma[n % 10] += 0.7;
    for (int i = 0; i <= 40; ++i) CHECK(visibility_prob(p, up, i / 40.0) >= visibility_prob(p, h, i / 40.0));
  }
}

TEST_CASE("projection onto a proposal") {
  const auto p = straight_up();
  const Point3 mid = 0.5 * (p.start() + p.end());
  CHECK(project_to_proposal(p, mid) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(project_to_proposal(p, mid + Point3{2.0, 0, 0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(project_to_proposal(p, Point3{0.0, -5.0, 0.0}) == 0.0);
  CHECK(project_to_proposal(p, Point3{0.0, 500.0, 0.0}) == 1.0);
}

TEST_CASE("projection lands on the orthogonal foot and is idempotent") {
  const auto set = make_proposal_set(ProposalSetConfig::defaults());
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t n = 0; n < set.size(); n += 3) {
    const auto& p = set[n];
    const auto base = realize_curve(p, LaneHypothesis::zeros(0, 10, 4));
    for (int i = 0; i < 10; ++i) {
      const double s = u(rng);
      const Point3 foot = p.start() + (p.end() - p.start()) * s;
      const Point3 q = foot + Point3{p.nx, p.ny, 0.0} * g(rng) + Point3{0, 0, g(rng)};
      const double t = project_to_proposal(p, q);
      // Oracle: the undeflected curve at t is the foot point.
      CHECK(norm(base.eval(t) - foot) < 1e-9);
      CHECK(project_to_proposal(p, base.eval(t)) == doctest::Approx(t).epsilon(1e-12));
    }
  }
}
