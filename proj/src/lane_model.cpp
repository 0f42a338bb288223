#include "lanespline/lane_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanespline {

Point3 LaneProposal::direction() const {
  const Point3 d = end() - start();
  return d / norm(d);
}

double LaneProposal::length() const { return norm(end() - start()); }

ProposalSetConfig ProposalSetConfig::defaults() {
  ProposalSetConfig cfg;
  const int n = 16;
  const double width = cfg.range.x_max - cfg.range.x_min;
  for (int i = 0; i < n; ++i) cfg.x_starts.push_back(cfg.range.x_min + width * (i + 0.5) / n);
  cfg.angles_deg = {-30.0, -10.0, 10.0, 30.0};
  return cfg;
}

LaneProposal make_proposal(double x_start, double yaw_deg, const BevRange& range,
                           const KnotVector& knots) {
  const double a = deg2rad(yaw_deg);
  const double dx = std::sin(a);
  const double dy = std::cos(a);
  if (x_start < range.x_min || x_start > range.x_max)
    throw InvalidConfiguration("proposal start outside BEV range");

  // Largest s with (x_start + s dx, y_min + s dy) inside the box.
  double s_max = std::numeric_limits<double>::infinity();
  constexpr double tiny = 1e-12;
  if (dx > tiny) s_max = std::min(s_max, (range.x_max - x_start) / dx);
  if (dx < -tiny) s_max = std::min(s_max, (range.x_min - x_start) / dx);
  if (dy > tiny) s_max = std::min(s_max, (range.y_max - range.y_min) / dy);
  if (dy < -tiny) s_max = 0.0;
  if (!(s_max > 1e-6) || !std::isfinite(s_max))
    throw InvalidConfiguration("proposal has no extent inside the BEV range");

  LaneProposal p;
  p.yaw_deg = yaw_deg;
  p.knots = knots;
  p.nx = dy;
  p.ny = -dx;
  p.nz = 1.0;
  const int k = knots.count;
  p.base.resize(k);
  for (int i = 0; i < k; ++i) {
    const double s = s_max * i / (k - 1);
    p.base[i] = {x_start + s * dx, range.y_min + s * dy, 0.0};
  }
  return p;
}

std::vector<LaneProposal> make_proposal_set(const ProposalSetConfig& cfg) {
  if (cfg.x_starts.empty() || cfg.angles_deg.empty())
    throw InvalidConfiguration("proposal set needs at least one start and one angle");
  const KnotVector knots = make_clamped_knots(cfg.control_points, cfg.degree);
  std::vector<LaneProposal> out;
  out.reserve(cfg.x_starts.size() * cfg.angles_deg.size());
  for (double angle : cfg.angles_deg)
    for (double x : cfg.x_starts) out.push_back(make_proposal(x, angle, cfg.range, knots));
  return out;
}

LaneHypothesis LaneHypothesis::zeros(int proposal, int control_points, int categories) {
  LaneHypothesis h;
  h.proposal = proposal;
  h.alpha.assign(control_points, 0.0);
  h.beta.assign(control_points, 0.0);
  h.gamma.assign(control_points, 0.0);
  h.category_logits.assign(categories, 0.0);
  return h;
}

BSplineCurve<double> realize_curve(const LaneProposal& p, const LaneHypothesis& h) {
  return realize_curve<double>(p, h.alpha, h.beta);
}

double visibility_prob(const LaneProposal& p, const LaneHypothesis& h, double t) {
  return sigmoid(visibility_spline<double>(p, h.gamma).eval(t));
}

std::vector<Interval> visible_intervals(const ScalarSpline<double>& v, int samples) {
  samples = std::max(samples, 2);
  const std::vector<double> ts = uniform_parameters(samples);
  std::vector<double> vals(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) vals[i] = v.eval(ts[i]);

  auto crossing = [&](double lo, double hi) {
    // v(lo) and v(hi) straddle zero.
    const bool lo_pos = v.eval(lo) > 0.0;
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((v.eval(mid) > 0.0) == lo_pos)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };

  std::vector<Interval> out;
  bool inside = vals[0] > 0.0;
  double open = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const bool now = vals[i] > 0.0;
    if (now == inside) continue;
    const double c = crossing(ts[i - 1], ts[i]);
    if (now)
      open = c;
    else
      out.push_back({open, c});
    inside = now;
  }
  if (inside) out.push_back({open, 1.0});
  return out;
}

Interval visible_span(const ScalarSpline<double>& v, int samples) {
  const auto iv = visible_intervals(v, samples);
  if (iv.empty()) return {1.0, 0.0};
  return {iv.front().lo, iv.back().hi};
}

double proposal_fraction(const LaneProposal& p, double t) {
  const BasisRow row = basis_row(p.knots, t, 0);
  const double last = static_cast<double>(p.base.size() - 1);
  double s = 0.0;
  for (int j = 0; j <= row.degree; ++j) s += row.ders[0][j] * (row.first + j) / last;
  return s;
}

double project_to_proposal(const LaneProposal& p, const Point3& q) {
  const Point3 d = p.end() - p.start();
  const double len2 = dot(d, d);
  const double s = std::clamp(dot(q - p.start(), d) / len2, 0.0, 1.0);
  if (s == 0.0 || s == 1.0) return s;
  // The fraction is monotone in t; bisect to machine precision.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 64 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (proposal_fraction(p, mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lanespline
