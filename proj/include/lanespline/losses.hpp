#pragma once

// Training objective of the lane hypotheses: focal presence and category
// losses, visibility BCE, weighted L1 regression, the geometric priors and
// the surface term.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lanespline/assignment.hpp"
#include "lanespline/lane_model.hpp"
#include "lanespline/priors.hpp"
#include "lanespline/scene.hpp"
#include "lanespline/spatial_lift.hpp"

namespace lanespline {

struct LossWeights {
  double lambda_pr = 20.0;
  double lambda_cat = 2.0;
  double lambda_reg = 0.5;
  double lambda_vis = 1.0;
  double lambda_prior = 1.0;
  double lambda_surf = 0.1;
  double gamma_f = 6.0;
  std::array<double, 3> w{2.0, 10.0, 1.0};
  int n_gt_points = 20;

  void validate() const;
};

inline constexpr double kProbClamp = 1e-7;

template <class T>
T clamp_prob(const T& p) {
  return clamp_value(p, kProbClamp, 1.0 - kProbClamp);
}

// -(target log p + (1 - target) log(1 - p)) on the clamped probability.
template <class T>
T bce(const T& prob, double target) {
  using std::log;
  const T p = clamp_prob(prob);
  return -(target * log(p) + (1.0 - target) * log(1.0 - p));
}

// Two-sided focal BCE used for presence.
template <class T>
T focal_bce(const T& prob, double target, double gamma_f) {
  using std::log;
  using std::pow;
  const T p = clamp_prob(prob);
  T out(0.0);
  if (target != 0.0) out -= target * pow(1.0 - p, gamma_f) * log(p);
  if (target != 1.0) out -= (1.0 - target) * pow(p, gamma_f) * log(1.0 - p);
  return out;
}

template <class T>
std::vector<T> softmax(std::span<const T> logits) {
  using std::exp;
  double mx = value_of(logits[0]);
  for (const auto& l : logits) mx = std::max(mx, value_of(l));
  std::vector<T> out(logits.size());
  T total(0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = exp(logits[i] - mx);
    total += out[i];
  }
  for (auto& o : out) o /= total;
  return out;
}

// Ground-truth points of one lane with their proposal parameters.
struct GtSamples {
  std::vector<double> t;
  std::vector<Point3> points;
  std::vector<std::uint8_t> visible;
};

GtSamples project_gt(const LaneProposal& p, const GtLane& gt);

// Mean BCE of sigmoid(v(t_p)) against every gt visibility flag.
template <class T>
T visibility_term(const LaneProposal& p, std::span<const T> gamma, const GtSamples& s) {
  if (s.t.empty()) return T(0.0);
  const ScalarSpline<T> v = visibility_spline<T>(p, gamma);
  T sum(0.0);
  for (std::size_t i = 0; i < s.t.size(); ++i) sum += bce(sigmoid(v.eval(s.t[i])), s.visible[i]);
  return sum / static_cast<double>(s.t.size());
}

// Mean over gt points of the visibility-masked weighted L1 error.
template <class T>
T regression_term(const LaneProposal& p, std::span<const T> alpha, std::span<const T> beta,
                  const GtSamples& s, const std::array<double, 3>& w) {
  using std::abs;
  if (s.t.empty()) return T(0.0);
  const BSplineCurve<T> c = realize_curve<T>(p, alpha, beta);
  T sum(0.0);
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (!s.visible[i]) continue;
    const Vec3<T> d = c.eval(s.t[i]) - lift<T>(s.points[i]);
    sum += w[0] * abs(d.x) + w[1] * abs(d.y) + w[2] * abs(d.z);
  }
  return sum / static_cast<double>(s.t.size());
}

template <class T>
T presence_term(const T& logit, bool positive, double gamma_f) {
  return focal_bce(sigmoid(logit), positive ? 1.0 : 0.0, gamma_f);
}

// Positive-class focal term of the true category, averaged over classes.
template <class T>
T category_term(std::span<const T> logits, int cls, double gamma_f) {
  using std::log;
  using std::pow;
  const std::vector<T> p = softmax(logits);
  const T pc = clamp_prob(p.at(static_cast<std::size_t>(cls)));
  return -(pow(1.0 - pc, gamma_f) * log(pc)) / static_cast<double>(logits.size());
}

// Plain-value entry points on hypotheses.
double visibility_loss(const LaneProposal& p, const LaneHypothesis& h, const GtLane& gt);
double regression_loss(const LaneProposal& p, const LaneHypothesis& h, const GtLane& gt,
                       const LossWeights& weights = {});
double focal_presence_loss(const std::vector<LaneHypothesis>& hyps,
                           const std::vector<Assignment>& assignments, double gamma_f);
double focal_category_loss(const std::vector<LaneHypothesis>& hyps,
                           const std::vector<Assignment>& assignments,
                           const std::vector<int>& gt_categories, double gamma_f);

// Flat parameter vector: per hypothesis alpha, beta, gamma (K each), the
// presence logit and C category logits.
struct ParamLayout {
  int hypotheses = 0;
  int control_points = 10;
  int categories = 4;

  int stride() const { return 3 * control_points + 1 + categories; }
  int size() const { return hypotheses * stride(); }
  int alpha(int h) const { return h * stride(); }
  int beta(int h) const { return alpha(h) + control_points; }
  int gamma(int h) const { return alpha(h) + 2 * control_points; }
  int presence(int h) const { return alpha(h) + 3 * control_points; }
  int category(int h) const { return presence(h) + 1; }
};

std::vector<double> pack(const std::vector<LaneHypothesis>& hyps, const ParamLayout& layout);
std::vector<LaneHypothesis> unpack(std::span<const double> params, const ParamLayout& layout,
                                   const std::vector<LaneHypothesis>& like);

enum class LossTerm { Presence, Category, Regression, Visibility, Prior, Surface };
inline constexpr std::array<LossTerm, 6> kLossTerms{LossTerm::Presence,   LossTerm::Category,
                                                    LossTerm::Regression, LossTerm::Visibility,
                                                    LossTerm::Prior,      LossTerm::Surface};
const char* loss_term_name(LossTerm t);
LossTerm parse_loss_term(const std::string& s);

// Weighted contributions; total is their sum.
template <class T>
struct LossBreakdown {
  T presence{};
  T category{};
  T regression{};
  T visibility{};
  T prior{};
  T surface{};
  T total{};

  T& operator[](LossTerm t) {
    switch (t) {
      case LossTerm::Presence: return presence;
      case LossTerm::Category: return category;
      case LossTerm::Regression: return regression;
      case LossTerm::Visibility: return visibility;
      case LossTerm::Prior: return prior;
      default: return surface;
    }
  }
  const T& operator[](LossTerm t) const { return const_cast<LossBreakdown&>(*this)[t]; }
  void sum() { total = presence + category + regression + visibility + prior + surface; }
};

// Everything the loss needs besides the parameters. Assignment, gt
// projection and the choice of prior lanes are fixed here.
struct LossContext {
  std::vector<LaneProposal> proposals;
  ParamLayout layout;
  LossWeights weights;
  PriorConfig prior;
  std::vector<GtLane> gts;             // resampled to n_gt_points
  std::vector<Assignment> assignments;
  std::vector<GtSamples> samples;      // per assignment
  std::vector<int> gt_category;        // per gt
  std::vector<std::uint8_t> positive;  // per proposal
  // One hypothesis per matched gt (its lowest-cost proposal), left to right.
  std::vector<int> representatives;
  double surface = 0.0;  // unweighted surface loss; no hypothesis dependence
};

LossContext make_loss_context(const std::vector<LaneProposal>& proposals,
                              const SceneGroundTruth& scene, const LossWeights& weights = {},
                              const PriorConfig& prior = {}, const MatchConfig& match = {});

// Unweighted surface loss of a BEV grid against the surface truth of the
// scene lanes.
double scene_surface_loss(const SceneGroundTruth& scene, const BevGrid& bev);

namespace detail {

template <class T>
std::span<const T> segment(std::span<const T> params, int offset, int count) {
  return params.subspan(static_cast<std::size_t>(offset), static_cast<std::size_t>(count));
}

template <class T>
PriorLane<T> prior_lane(const LossContext& ctx, std::span<const T> params, int h) {
  const int k = ctx.layout.control_points;
  const LaneProposal& p = ctx.proposals.at(static_cast<std::size_t>(h));
  std::vector<double> g(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) g[i] = value_of(params[ctx.layout.gamma(h) + i]);
  PriorLane<T> lane{realize_curve<T>(p, segment(params, ctx.layout.alpha(h), k),
                                     segment(params, ctx.layout.beta(h), k)),
                    visible_span(ScalarSpline<double>(p.knots, std::move(g)))};
  return lane;
}

}  // namespace detail

// Weighted value of a single term.
template <class T>
T loss_term(const LossContext& ctx, LossTerm term, std::span<const T> params) {
  const ParamLayout& L = ctx.layout;
  if (params.size() != static_cast<std::size_t>(L.size()))
    throw InvalidInput("parameter vector does not match layout");
  const LossWeights& w = ctx.weights;
  const double m = static_cast<double>(L.hypotheses);
  const int k = L.control_points;
  T out(0.0);
  switch (term) {
    case LossTerm::Presence:
      if (w.lambda_pr == 0.0) return out;
      for (int h = 0; h < L.hypotheses; ++h)
        out += presence_term(params[L.presence(h)], ctx.positive[h] != 0, w.gamma_f);
      return w.lambda_pr * out / m;
    case LossTerm::Category:
      if (w.lambda_cat == 0.0) return out;
      for (const auto& a : ctx.assignments)
        out += category_term(detail::segment(params, L.category(a.proposal), L.categories),
                             ctx.gt_category[a.gt], w.gamma_f);
      return w.lambda_cat * out / m;
    case LossTerm::Regression:
      if (w.lambda_reg == 0.0) return out;
      for (std::size_t i = 0; i < ctx.assignments.size(); ++i) {
        const int h = ctx.assignments[i].proposal;
        out += regression_term(ctx.proposals[h], detail::segment(params, L.alpha(h), k),
                               detail::segment(params, L.beta(h), k), ctx.samples[i], w.w);
      }
      return w.lambda_reg * out / m;
    case LossTerm::Visibility:
      if (w.lambda_vis == 0.0) return out;
      for (std::size_t i = 0; i < ctx.assignments.size(); ++i) {
        const int h = ctx.assignments[i].proposal;
        out += visibility_term(ctx.proposals[h], detail::segment(params, L.gamma(h), k),
                               ctx.samples[i]);
      }
      return w.lambda_vis * out / m;
    case LossTerm::Prior: {
      if (w.lambda_prior == 0.0 || ctx.representatives.empty()) return out;
      std::vector<PriorLane<T>> lanes;
      for (int h : ctx.representatives) lanes.push_back(detail::prior_lane(ctx, params, h));
      return w.lambda_prior * prior_loss(lanes, ctx.prior);
    }
    case LossTerm::Surface:
      return T(w.lambda_surf * ctx.surface);
  }
  return out;
}

template <class T>
LossBreakdown<T> total_loss(const LossContext& ctx, std::span<const T> params) {
  LossBreakdown<T> b;
  for (LossTerm t : kLossTerms) b[t] = loss_term(ctx, t, params);
  b.sum();
  return b;
}

struct LossEvaluation {
  LossBreakdown<double> loss;
  std::vector<double> gradient;
};

// Value and exact gradient of total_loss, exploiting that each term only
// touches a few parameter blocks.
LossEvaluation loss_and_gradient(const LossContext& ctx, std::span<const double> params);

}  // namespace lanespline
