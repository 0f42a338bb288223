#pragma once

// Geometric prior losses on realized lanes: parallelism of neighbors,
// smoothness of the surface spanned by neighbors, and bounded curvature.
//
// All selections (normal point pairing, gating) are made on plain values; the
// differentiable quantities are then evaluated in the scalar type T at the
// selected curve parameters.

#include <cmath>
#include <limits>
#include <vector>

#include "lanespline/lane_model.hpp"
#include "lanespline/spline.hpp"

namespace lanespline {

struct PriorConfig {
  double od_thr = 1.0;     // m
  double sigma_thr = 2.0;  // m
  double kappa_xy = 5.0;   // 1/m
  double kappa_z = 0.1;    // 1/m
  int n_samples_par = 20;
  int n_samples_curv = 100;
  int n_pair_candidates = 100;  // samples on the neighbor line for pairing
  double lambda_par = 10.0;
  double lambda_sm = 0.01;
  double lambda_curv = 1.0;
};

template <class T>
struct PriorLane {
  BSplineCurve<T> curve;
  Interval visible{0.0, 1.0};  // parameter span treated as the lane's range
};

struct NormalPair {
  double t_p = 0.0;
  double t_p_star = 0.0;
  double od = 0.0;    // signed distance of the partner to the normal plane
  double dist = 0.0;  // euclidean distance between the two points
};

template <class T>
struct PriorBreakdown {
  T par{};
  T sm{};
  T curv{};
  T total{};
};

namespace detail {

inline bool inside(const Interval& iv, double t) { return iv.lo <= t && t <= iv.hi; }

// Plain-value samples of a curve on a uniform parameter grid.
struct CurveSamples {
  std::vector<double> ts;
  std::vector<Point3> pts;
};

template <class T>
CurveSamples sample_values(const BSplineCurve<T>& c, int n) {
  CurveSamples s;
  s.ts = uniform_parameters(n);
  s.pts.reserve(s.ts.size());
  for (double t : s.ts) s.pts.push_back(value_of(c.eval(t)));
  return s;
}

inline NormalPair select_pair(double t_p, const Point3& p, const Point3& tangent,
                              const CurveSamples& cand) {
  NormalPair best;
  best.t_p = t_p;
  double best_abs = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cand.ts.size(); ++k) {
    const double od = dot(tangent, cand.pts[k] - p);
    if (std::abs(od) < best_abs) {
      best_abs = std::abs(od);
      best.t_p_star = cand.ts[k];
      best.od = od;
      best.dist = norm(cand.pts[k] - p);
    }
  }
  return best;
}

// Gated normal pairs from lane i to lane j plus the pair-distance test.
struct PairGate {
  std::vector<NormalPair> pairs;  // per-point gate passed
  double sigma = 0.0;
  bool parallel = false;  // pairs nonempty and sigma < sigma_thr
};

template <class T>
PairGate gate_pairs(const PriorLane<T>& li, const PriorLane<T>& lj, const PriorConfig& cfg) {
  PairGate g;
  const CurveSamples cand = sample_values(lj.curve, cfg.n_pair_candidates);
  for (double t : uniform_parameters(cfg.n_samples_par)) {
    if (!inside(li.visible, t)) continue;
    const Point3 p = value_of(li.curve.eval(t));
    const Point3 tan = value_of(li.curve.unit_tangent(t));
    const NormalPair np = select_pair(t, p, tan, cand);
    if (std::abs(np.od) < cfg.od_thr && inside(lj.visible, np.t_p_star)) g.pairs.push_back(np);
  }
  if (g.pairs.empty()) return g;
  double mean = 0.0;
  for (const auto& np : g.pairs) mean += np.dist;
  mean /= g.pairs.size();
  double var = 0.0;
  for (const auto& np : g.pairs) var += (np.dist - mean) * (np.dist - mean);
  g.sigma = std::sqrt(var / g.pairs.size());
  g.parallel = g.sigma < cfg.sigma_thr;
  return g;
}

template <class T>
Vec3<T> connection_normal(const BSplineCurve<T>& ci, const BSplineCurve<T>& cn,
                          const NormalPair& np, bool right) {
  const Vec3<T> tan = ci.unit_tangent(np.t_p);
  const Vec3<T> conn = cn.eval(np.t_p_star) - ci.eval(np.t_p);
  const T len = norm(conn);
  if (!(value_of(len) > kTangentEps)) throw DegenerateNormal("coincident pair points");
  Vec3<T> n = cross(tan, conn / len);
  return right ? -n : n;
}

template <class T>
T planar_norm(const T& a, const T& b) {
  using std::sqrt;
  const double v = value_of(a) * value_of(a) + value_of(b) * value_of(b);
  if (v == 0.0) return T(0.0);
  return sqrt(a * a + b * b);
}

}  // namespace detail

// Partner of f_i(t_p) on curve j among `samples` uniform parameters, chosen by
// smallest absolute distance to the normal plane of curve i at t_p.
template <class T>
NormalPair normal_pair(const BSplineCurve<T>& ci, double t_p, const BSplineCurve<T>& cj,
                       int samples) {
  const Point3 p = value_of(ci.eval(t_p));
  const Point3 tan = value_of(ci.unit_tangent(t_p));
  return detail::select_pair(t_p, p, tan, detail::sample_values(cj, samples));
}

template <class T>
T parallelism_loss(const PriorLane<T>& li, const PriorLane<T>& lj, const PriorConfig& cfg) {
  const detail::PairGate g = detail::gate_pairs(li, lj, cfg);
  if (!g.parallel) return T(0.0);
  T sum(0.0);
  for (const auto& np : g.pairs)
    sum += 1.0 - dot(li.curve.unit_tangent(np.t_p), lj.curve.unit_tangent(np.t_p_star));
  return sum / static_cast<double>(cfg.n_samples_par);
}

enum class Side { Left, Right };

// Upward surface normal between lane i and a neighbor at parameter t_p.
template <class T>
Vec3<T> surface_normal(const PriorLane<T>& li, const PriorLane<T>& neighbor, double t_p,
                       Side side, const PriorConfig& cfg = {}) {
  const NormalPair np = normal_pair(li.curve, t_p, neighbor.curve, cfg.n_pair_candidates);
  return detail::connection_normal(li.curve, neighbor.curve, np, side == Side::Right);
}

template <class T>
T smoothness_loss(const PriorLane<T>& lh, const PriorLane<T>& li, const PriorLane<T>& lj,
                  const PriorConfig& cfg) {
  const detail::PairGate gl = detail::gate_pairs(li, lh, cfg);
  const detail::PairGate gr = detail::gate_pairs(li, lj, cfg);
  if (!gl.parallel || !gr.parallel) return T(0.0);
  T sum(0.0);
  std::size_t a = 0, b = 0;
  // Both gate lists are ordered by t_p; walk them together.
  while (a < gl.pairs.size() && b < gr.pairs.size()) {
    if (gl.pairs[a].t_p < gr.pairs[b].t_p) {
      ++a;
      continue;
    }
    if (gr.pairs[b].t_p < gl.pairs[a].t_p) {
      ++b;
      continue;
    }
    const NormalPair& pl = gl.pairs[a++];
    const NormalPair& pr = gr.pairs[b++];
    if (!(pl.dist > kTangentEps) || !(pr.dist > kTangentEps)) continue;
    const Vec3<T> n_left = detail::connection_normal(li.curve, lh.curve, pl, false);
    const Vec3<T> n_right = detail::connection_normal(li.curve, lj.curve, pr, true);
    sum += 1.0 - dot(n_left, n_right);
  }
  return sum / static_cast<double>(cfg.n_samples_par);
}

// Curvature from differences of unit tangents at consecutive samples,
// penalized through max(|T'_xy|, kappa_xy) + max(|T'_z|, kappa_z).
template <class T>
T curvature_loss(const PriorLane<T>& lane, const PriorConfig& cfg) {
  if (cfg.n_samples_curv < 2) throw InvalidConfiguration("curvature needs at least 2 samples");
  using std::abs;
  const std::vector<double> ts = uniform_parameters(cfg.n_samples_curv);
  Vec3<T> prev_tan = lane.curve.unit_tangent(ts[0]);
  Vec3<T> prev_pt = lane.curve.eval(ts[0]);
  T sum(0.0);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const Vec3<T> tan = lane.curve.unit_tangent(ts[i]);
    const Vec3<T> pt = lane.curve.eval(ts[i]);
    const T step = norm(pt - prev_pt);
    if (!(value_of(step) > 0.0)) throw DegenerateStep("zero arc step between curvature samples");
    const Vec3<T> dt = (tan - prev_tan) / step;
    sum += max_with(detail::planar_norm(dt.x, dt.y), cfg.kappa_xy) +
           max_with(abs(dt.z), cfg.kappa_z);
    prev_tan = tan;
    prev_pt = pt;
  }
  return sum / static_cast<double>(ts.size() - 1);
}

// True when the tangent is well defined at every parameter the priors sample.
template <class T>
bool has_regular_tangents(const BSplineCurve<T>& c, const PriorConfig& cfg) {
  auto ok = [&](int n) {
    for (double t : uniform_parameters(n))
      if (!(norm(value_of(c.derivative(t, 1))) > kTangentEps)) return false;
    return true;
  };
  return ok(cfg.n_samples_par) && ok(cfg.n_samples_curv) && ok(cfg.n_pair_candidates);
}

// Weighted prior over lanes ordered left to right. Lanes with degenerate
// tangents are dropped before neighbors are formed.
template <class T>
PriorBreakdown<T> prior_terms(const std::vector<PriorLane<T>>& lanes, const PriorConfig& cfg) {
  std::vector<const PriorLane<T>*> use;
  for (const auto& l : lanes)
    if (has_regular_tangents(l.curve, cfg)) use.push_back(&l);
  PriorBreakdown<T> out;
  const std::size_t n = use.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.lambda_curv != 0.0) out.curv += cfg.lambda_curv * curvature_loss(*use[i], cfg);
    if (cfg.lambda_par != 0.0) {
      if (i > 0) out.par += cfg.lambda_par * parallelism_loss(*use[i], *use[i - 1], cfg);
      if (i + 1 < n) out.par += cfg.lambda_par * parallelism_loss(*use[i], *use[i + 1], cfg);
    }
    if (cfg.lambda_sm != 0.0 && i > 0 && i + 1 < n)
      out.sm += cfg.lambda_sm * smoothness_loss(*use[i - 1], *use[i], *use[i + 1], cfg);
  }
  out.total = out.par + out.sm + out.curv;
  return out;
}

template <class T>
T prior_loss(const std::vector<PriorLane<T>>& lanes, const PriorConfig& cfg) {
  return prior_terms(lanes, cfg).total;
}

// Left-to-right order of polylines by x at the smallest y all of them reach.
std::vector<int> order_left_to_right(const std::vector<std::vector<Point3>>& lanes);

// Same rule applied to realized lanes, sampled over their visible spans.
std::vector<int> neighbor_order(const std::vector<PriorLane<double>>& lanes, int samples = 200);

}  // namespace lanespline
