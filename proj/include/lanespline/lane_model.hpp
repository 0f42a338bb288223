#pragma once

// Straight initial proposals and the two-degree-of-freedom control point
// parametrization built on top of them.

#include <span>
#include <vector>

#include "lanespline/spline.hpp"

namespace lanespline {

struct BevRange {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = 3.0;
  double y_max = 103.0;
};

struct LaneProposal {
  std::vector<Point3> base;  // K evenly spaced points on a segment at z = 0
  double nx = 1.0;           // in-plane unit normal (nx, ny)
  double ny = 0.0;
  double nz = 1.0;           // vertical deflection direction
  double yaw_deg = 0.0;
  KnotVector knots;

  const Point3& start() const { return base.front(); }
  const Point3& end() const { return base.back(); }
  Point3 direction() const;  // unit vector start -> end
  double length() const;
};

struct ProposalSetConfig {
  std::vector<double> x_starts;    // lateral position at y = range.y_min
  std::vector<double> angles_deg;  // yaw from +y towards +x
  BevRange range;
  int control_points = 10;
  int degree = 3;

  // 16 lateral starts at bin centers over [-10, 10] x yaw {-30, -10, 10, 30}.
  static ProposalSetConfig defaults();
};

LaneProposal make_proposal(double x_start, double yaw_deg, const BevRange& range,
                           const KnotVector& knots);
std::vector<LaneProposal> make_proposal_set(const ProposalSetConfig& cfg);

// Parameters of one lane hypothesis; K entries each for alpha, beta, gamma.
struct LaneHypothesis {
  int proposal = 0;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;
  double presence_logit = 0.0;
  std::vector<double> category_logits;

  static LaneHypothesis zeros(int proposal, int control_points, int categories);
};

template <class T>
BSplineCurve<T> realize_curve(const LaneProposal& p, std::span<const T> alpha,
                              std::span<const T> beta) {
  const std::size_t k = p.base.size();
  if (alpha.size() != k || beta.size() != k)
    throw InvalidConfiguration("deflection parameter count does not match proposal");
  std::vector<Vec3<T>> cps(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Point3& c = p.base[i];
    cps[i] = {alpha[i] * p.nx + c.x, alpha[i] * p.ny + c.y, beta[i] * p.nz + c.z};
  }
  return BSplineCurve<T>(p.knots, std::move(cps));
}

template <class T>
ScalarSpline<T> visibility_spline(const LaneProposal& p, std::span<const T> gamma) {
  if (gamma.size() != p.base.size())
    throw InvalidConfiguration("visibility parameter count does not match proposal");
  return ScalarSpline<T>(p.knots, std::vector<T>(gamma.begin(), gamma.end()));
}

BSplineCurve<double> realize_curve(const LaneProposal& p, const LaneHypothesis& h);
double visibility_prob(const LaneProposal& p, const LaneHypothesis& h, double t);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Sub-intervals of [0, 1] where sigmoid(v(t)) > 0.5, found by sampling and
// bisection on the crossings.
std::vector<Interval> visible_intervals(const ScalarSpline<double>& v, int samples = 200);

// Smallest interval containing every visible sub-interval (empty -> nullopt
// encoded as lo > hi).
Interval visible_span(const ScalarSpline<double>& v, int samples = 200);

// Position along the segment, as a fraction of its length, of the undeflected
// curve at parameter t. Evenly spaced control points make this nonlinear.
double proposal_fraction(const LaneProposal& p, double t);

// Curve parameter at which the undeflected curve passes through the
// orthogonal foot point of q on the proposal segment, clamped to [0, 1].
double project_to_proposal(const LaneProposal& p, const Point3& q);

}  // namespace lanespline
