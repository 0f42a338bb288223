#include "lanespline/losses.hpp"

#include <algorithm>
#include <limits>

#include "lanespline/gradient.hpp"

namespace lanespline {

void LossWeights::validate() const {
  for (double v : {lambda_pr, lambda_cat, lambda_reg, lambda_vis, lambda_prior, lambda_surf, gamma_f,
                   w[0], w[1], w[2]})
    if (!(v >= 0.0)) throw InvalidConfiguration("loss weights must be nonnegative");
  if (n_gt_points < 2) throw InvalidConfiguration("n_gt_points must be at least 2");
}

GtSamples project_gt(const LaneProposal& p, const GtLane& gt) {
  GtSamples s;
  s.points = gt.points;
  s.visible = gt.visibility;
  s.t.reserve(gt.points.size());
  for (const auto& q : gt.points) s.t.push_back(project_to_proposal(p, q));
  return s;
}

double visibility_loss(const LaneProposal& p, const LaneHypothesis& h, const GtLane& gt) {
  return visibility_term<double>(p, h.gamma, project_gt(p, gt));
}

double regression_loss(const LaneProposal& p, const LaneHypothesis& h, const GtLane& gt,
                       const LossWeights& weights) {
  return regression_term<double>(p, h.alpha, h.beta, project_gt(p, gt), weights.w);
}

double focal_presence_loss(const std::vector<LaneHypothesis>& hyps,
                           const std::vector<Assignment>& assignments, double gamma_f) {
  if (hyps.empty()) return 0.0;
  std::vector<std::uint8_t> pos(hyps.size(), 0);
  for (const auto& a : assignments) pos.at(static_cast<std::size_t>(a.proposal)) = 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i)
    sum += presence_term(hyps[i].presence_logit, pos[i] != 0, gamma_f);
  return sum / static_cast<double>(hyps.size());
}

double focal_category_loss(const std::vector<LaneHypothesis>& hyps,
                           const std::vector<Assignment>& assignments,
                           const std::vector<int>& gt_categories, double gamma_f) {
  if (hyps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& a : assignments)
    sum += category_term<double>(hyps.at(static_cast<std::size_t>(a.proposal)).category_logits,
                                 gt_categories.at(static_cast<std::size_t>(a.gt)), gamma_f);
  return sum / static_cast<double>(hyps.size());
}

std::vector<double> pack(const std::vector<LaneHypothesis>& hyps, const ParamLayout& layout) {
  if (static_cast<int>(hyps.size()) != layout.hypotheses)
    throw InvalidInput("hypothesis count does not match layout");
  std::vector<double> out(static_cast<std::size_t>(layout.size()));
  const int k = layout.control_points;
  for (int h = 0; h < layout.hypotheses; ++h) {
    const LaneHypothesis& hy = hyps[h];
    if (static_cast<int>(hy.alpha.size()) != k || static_cast<int>(hy.beta.size()) != k ||
        static_cast<int>(hy.gamma.size()) != k ||
        static_cast<int>(hy.category_logits.size()) != layout.categories)
      throw InvalidInput("hypothesis parameter sizes do not match layout");
    std::copy(hy.alpha.begin(), hy.alpha.end(), out.begin() + layout.alpha(h));
    std::copy(hy.beta.begin(), hy.beta.end(), out.begin() + layout.beta(h));
    std::copy(hy.gamma.begin(), hy.gamma.end(), out.begin() + layout.gamma(h));
    out[layout.presence(h)] = hy.presence_logit;
    std::copy(hy.category_logits.begin(), hy.category_logits.end(),
              out.begin() + layout.category(h));
  }
  return out;
}

std::vector<LaneHypothesis> unpack(std::span<const double> params, const ParamLayout& layout,
                                   const std::vector<LaneHypothesis>& like) {
  if (params.size() != static_cast<std::size_t>(layout.size()))
    throw InvalidInput("parameter vector does not match layout");
  std::vector<LaneHypothesis> out = like;
  const int k = layout.control_points;
  for (int h = 0; h < layout.hypotheses; ++h) {
    auto at = [&](int off, int n) { return std::vector<double>(params.begin() + off, params.begin() + off + n); };
    out[h].alpha = at(layout.alpha(h), k);
    out[h].beta = at(layout.beta(h), k);
    out[h].gamma = at(layout.gamma(h), k);
    out[h].presence_logit = params[layout.presence(h)];
    out[h].category_logits = at(layout.category(h), layout.categories);
  }
  return out;
}

const char* loss_term_name(LossTerm t) {
  switch (t) {
    case LossTerm::Presence: return "presence";
    case LossTerm::Category: return "category";
    case LossTerm::Regression: return "regression";
    case LossTerm::Visibility: return "visibility";
    case LossTerm::Prior: return "prior";
    case LossTerm::Surface: return "surface";
  }
  return "unknown";
}

LossTerm parse_loss_term(const std::string& s) {
  for (LossTerm t : kLossTerms)
    if (s == loss_term_name(t)) return t;
  throw InvalidInput("unknown loss term '" + s + "'");
}

LossContext make_loss_context(const std::vector<LaneProposal>& proposals,
                              const SceneGroundTruth& scene, const LossWeights& weights,
                              const PriorConfig& prior, const MatchConfig& match) {
  weights.validate();
  if (proposals.empty()) throw InvalidConfiguration("no proposals");
  LossContext ctx;
  ctx.proposals = proposals;
  ctx.weights = weights;
  ctx.prior = prior;
  ctx.layout.hypotheses = static_cast<int>(proposals.size());
  ctx.layout.control_points = static_cast<int>(proposals.front().base.size());
  ctx.layout.categories = static_cast<int>(category_names().size());

  std::vector<std::vector<Point3>> polys;
  for (const auto& l : scene.lanes) {
    ctx.gts.push_back(resample_lane(l, weights.n_gt_points));
    ctx.gt_category.push_back(category_index(l.category));
    polys.push_back(ctx.gts.back().points);
  }
  ctx.assignments = assign(proposals, polys, match);
  ctx.positive.assign(proposals.size(), 0);
  std::vector<int> best(polys.size(), -1);
  std::vector<double> best_cost(polys.size(), std::numeric_limits<double>::infinity());
  for (const auto& a : ctx.assignments) {
    ctx.positive[a.proposal] = 1;
    ctx.samples.push_back(project_gt(proposals[a.proposal], ctx.gts[a.gt]));
    if (a.cost < best_cost[a.gt]) {
      best_cost[a.gt] = a.cost;
      best[a.gt] = a.proposal;
    }
  }
  if (!polys.empty())
    for (int g : order_left_to_right(polys))
      if (best[g] >= 0) ctx.representatives.push_back(best[g]);
  return ctx;
}

double scene_surface_loss(const SceneGroundTruth& scene, const BevGrid& bev) {
  return surface_loss(bev, surface_gt_from_lanes(scene.point_lists(), bev.config));
}

namespace {

// Adds scale * d(f)/d(params[offsets]) into grad and returns f's value.
template <class F>
double accumulate_block(F&& f, std::span<const double> params, const std::vector<int>& offsets,
                        std::vector<double>& grad, const char* term) {
  std::vector<double> local(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) local[i] = params[offsets[i]];
  const ValueAndGradient vg = value_and_gradient(
      [&](std::span<const Grad> x) { return f(x); }, std::span<const double>(local), term);
  for (std::size_t i = 0; i < offsets.size(); ++i) grad[offsets[i]] += vg.gradient[i];
  return vg.value;
}

std::vector<int> range(int start, int count) {
  std::vector<int> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[i] = start + i;
  return r;
}

}  // namespace

LossEvaluation loss_and_gradient(const LossContext& ctx, std::span<const double> params) {
  const ParamLayout& L = ctx.layout;
  if (params.size() != static_cast<std::size_t>(L.size()))
    throw InvalidInput("parameter vector does not match layout");
  const LossWeights& w = ctx.weights;
  const double m = static_cast<double>(L.hypotheses);
  const int k = L.control_points;
  LossEvaluation ev;
  ev.gradient.assign(params.size(), 0.0);
  auto& g = ev.gradient;

  if (w.lambda_pr != 0.0) {
    const double s = w.lambda_pr / m;
    for (int h = 0; h < L.hypotheses; ++h) {
      const bool pos = ctx.positive[h] != 0;
      ev.loss.presence += accumulate_block(
          [&](std::span<const Grad> x) { return s * presence_term(x[0], pos, w.gamma_f); },
          params, {L.presence(h)}, g, "presence");
    }
  }
  if (w.lambda_cat != 0.0) {
    const double s = w.lambda_cat / m;
    for (const auto& a : ctx.assignments) {
      const int cls = ctx.gt_category[a.gt];
      ev.loss.category += accumulate_block(
          [&](std::span<const Grad> x) { return s * category_term(x, cls, w.gamma_f); }, params,
          range(L.category(a.proposal), L.categories), g, "category");
    }
  }
  for (std::size_t i = 0; i < ctx.assignments.size(); ++i) {
    const int h = ctx.assignments[i].proposal;
    const LaneProposal& p = ctx.proposals[h];
    const GtSamples& smp = ctx.samples[i];
    if (w.lambda_reg != 0.0) {
      const double s = w.lambda_reg / m;
      std::vector<int> idx = range(L.alpha(h), 2 * k);
      ev.loss.regression += accumulate_block(
          [&](std::span<const Grad> x) {
            return s * regression_term(p, x.subspan(0, k), x.subspan(k, k), smp, w.w);
          },
          params, idx, g, "regression");
    }
    if (w.lambda_vis != 0.0) {
      const double s = w.lambda_vis / m;
      ev.loss.visibility += accumulate_block(
          [&](std::span<const Grad> x) { return s * visibility_term(p, x, smp); }, params,
          range(L.gamma(h), k), g, "visibility");
    }
  }
  if (w.lambda_prior != 0.0 && !ctx.representatives.empty()) {
    // Curvature is separable per lane; pair terms couple all prior lanes.
    const PriorConfig& pc = ctx.prior;
    std::vector<PriorLane<double>> plain;
    for (int h : ctx.representatives) plain.push_back(detail::prior_lane(ctx, params, h));
    std::vector<int> used;
    for (std::size_t i = 0; i < plain.size(); ++i)
      if (has_regular_tangents(plain[i].curve, pc)) used.push_back(ctx.representatives[i]);
    auto lanes_from = [&](std::span<const Grad> x, const std::vector<int>& hs) {
      std::vector<PriorLane<Grad>> lanes;
      for (std::size_t j = 0; j < hs.size(); ++j) {
        const int h = hs[j];
        std::vector<double> gam(params.begin() + L.gamma(h), params.begin() + L.gamma(h) + k);
        lanes.push_back({realize_curve<Grad>(ctx.proposals[h], x.subspan(2 * k * j, k),
                                             x.subspan(2 * k * j + k, k)),
                         visible_span(ScalarSpline<double>(ctx.proposals[h].knots, std::move(gam)))});
      }
      return lanes;
    };
    auto ab_offsets = [&](const std::vector<int>& hs) {
      std::vector<int> idx;
      for (int h : hs)
        for (int o : range(L.alpha(h), 2 * k)) idx.push_back(o);
      return idx;
    };
    if (pc.lambda_curv != 0.0) {
      PriorConfig only = pc;
      only.lambda_par = only.lambda_sm = 0.0;
      for (int h : used) {
        const std::vector<int> hs{h};
        ev.loss.prior += accumulate_block(
            [&](std::span<const Grad> x) {
              return w.lambda_prior * prior_terms(lanes_from(x, hs), only).total;
            },
            params, ab_offsets(hs), g, "prior");
      }
    }
    if ((pc.lambda_par != 0.0 || pc.lambda_sm != 0.0) && used.size() > 1) {
      PriorConfig pairs = pc;
      pairs.lambda_curv = 0.0;
      ev.loss.prior += accumulate_block(
          [&](std::span<const Grad> x) {
            return w.lambda_prior * prior_terms(lanes_from(x, used), pairs).total;
          },
          params, ab_offsets(used), g, "prior");
    }
  }
  ev.loss.surface = w.lambda_surf * ctx.surface;
  ev.loss.sum();
  return ev;
}

}  // namespace lanespline
