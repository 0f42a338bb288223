#include "lanespline/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lanespline/fit.hpp"
#include "lanespline/gradient.hpp"

namespace lanespline {

SceneGroundTruth gradcheck_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.n_lanes = 4;
  spec.centerline = {0.5, 0.01, 2e-4, 0.0};
  spec.surface = {0.02, 1e-4, 0.01};
  spec.occlusions = {{}, {{45.0, 70.0}}, {}, {{80.0, 100.0}}};
  spec.noise = {0.03, 0.03, 0.01};
  spec.categories = {"solid", "dashed", "dashed", "curb"};
  spec.seed = seed;
  spec.scenario = "gradcheck";
  return gen_scene(spec);
}

LossContext gradcheck_context(std::uint64_t seed) {
  PriorConfig prior;
  prior.kappa_xy = 0.0;
  prior.kappa_z = 0.0;
  return make_loss_context(make_proposal_set(ProposalSetConfig::defaults()), gradcheck_scene(seed),
                           LossWeights{}, prior);
}

namespace {

std::vector<int> term_indices(const LossContext& ctx, LossTerm term) {
  const ParamLayout& L = ctx.layout;
  std::vector<int> idx;
  auto add = [&](int start, int n) {
    for (int i = 0; i < n; ++i) idx.push_back(start + i);
  };
  switch (term) {
    case LossTerm::Presence:
      for (int h = 0; h < L.hypotheses; ++h) idx.push_back(L.presence(h));
      break;
    case LossTerm::Category:
      for (const auto& a : ctx.assignments) add(L.category(a.proposal), L.categories);
      break;
    case LossTerm::Regression:
      for (const auto& a : ctx.assignments) add(L.alpha(a.proposal), 2 * L.control_points);
      break;
    case LossTerm::Visibility:
      for (const auto& a : ctx.assignments) add(L.gamma(a.proposal), L.control_points);
      break;
    case LossTerm::Prior:
      for (int h : ctx.representatives) add(L.alpha(h), 2 * L.control_points);
      break;
    case LossTerm::Surface:
      break;
  }
  return idx;
}

LossContext only(const LossContext& ctx, LossTerm term) {
  LossContext c = ctx;
  LossWeights& w = c.weights;
  for (LossTerm t : kLossTerms) {
    if (t == term) continue;
    switch (t) {
      case LossTerm::Presence: w.lambda_pr = 0.0; break;
      case LossTerm::Category: w.lambda_cat = 0.0; break;
      case LossTerm::Regression: w.lambda_reg = 0.0; break;
      case LossTerm::Visibility: w.lambda_vis = 0.0; break;
      case LossTerm::Prior: w.lambda_prior = 0.0; break;
      case LossTerm::Surface: w.lambda_surf = 0.0; break;
    }
  }
  return c;
}

std::vector<double> random_state(const LossContext& ctx, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const ParamLayout& L = ctx.layout;
  std::vector<double> x(static_cast<std::size_t>(L.size()));
  for (int h = 0; h < L.hypotheses; ++h) {
    for (int k = 0; k < L.control_points; ++k) {
      x[L.alpha(h) + k] = 0.4 * g(rng);
      x[L.beta(h) + k] = 0.2 * g(rng);
      x[L.gamma(h) + k] = 0.5 + g(rng);
    }
    x[L.presence(h)] = g(rng);
    for (int c = 0; c < L.categories; ++c) x[L.category(h) + c] = g(rng);
  }
  return x;
}

void accumulate(TermCheck& tc, const std::vector<double>& analytic, const std::vector<double>& fd) {
  for (std::size_t i = 0; i < fd.size(); ++i) {
    if (std::max(std::abs(analytic[i]), std::abs(fd[i])) > kGradientFloor) ++tc.checked;
    tc.max_rel_err = std::max(tc.max_rel_err, relative_error(analytic[i], fd[i]));
  }
}

// Central differences evaluated in extended precision so that round-off
// stays far below the step's truncation error.
template <class F>
std::vector<double> extended_fd(F&& f, const std::vector<double>& x0, double h) {
  std::vector<long double> x(x0.begin(), x0.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double keep = x[i];
    x[i] = keep + h;
    const long double up = f(std::span<const long double>(x));
    x[i] = keep - h;
    const long double down = f(std::span<const long double>(x));
    x[i] = keep;
    g[i] = static_cast<double>((up - down) / (2.0L * h));
  }
  return g;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  if (cfg.states < 1) throw InvalidConfiguration("gradcheck needs at least one state");
  const SceneGroundTruth scene = gradcheck_scene(cfg.seed);
  const LossContext ctx = gradcheck_context(cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  // Surface term: heights from softmax(depth logits) on a coarse lift.
  const BevGridConfig grid;
  const SurfaceHypothesisSet planes = hypothesis_planes(5);
  const LiftGeometry geom = lift_geometry(12, 16, scene.camera, planes, grid);
  const SurfaceTruth truth = surface_gt_from_lanes(scene.point_lists(), grid);

  GradcheckReport rep;
  for (LossTerm term : kLossTerms) {
    TermCheck tc;
    tc.term = term;
    const double sign = cfg.flip && *cfg.flip == term ? -1.0 : 1.0;
    const LossContext single = only(ctx, term);
    const std::vector<int> idx = term_indices(ctx, term);
    for (int s = 0; s < cfg.states; ++s) {
      const std::vector<double> x = random_state(ctx, rng);
      if (term == LossTerm::Surface) {
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> logits(static_cast<std::size_t>(geom.rays) * geom.hypotheses);
        for (auto& l : logits) l = g(rng);
        const double lam = ctx.weights.lambda_surf;
        auto f = [&](auto p) {
          using T = typename decltype(p)::value_type;
          return lam * surface_loss_from_logits<T>(geom, p, truth);
        };
        std::vector<double> a = gradient(f, std::span<const double>(logits), "surface");
        for (auto& v : a) v *= sign;
        accumulate(tc, a, extended_fd(f, logits, cfg.h));
        tc.parameters = static_cast<int>(logits.size());
        continue;
      }
      const LossEvaluation ev = loss_and_gradient(single, x);
      std::vector<double> a, fd;
      std::vector<long double> xp(x.begin(), x.end());
      for (int i : idx) {
        a.push_back(sign * ev.gradient[i]);
        const long double keep = xp[i];
        xp[i] = keep + cfg.h;
        const long double up = loss_term<long double>(ctx, term, xp);
        xp[i] = keep - cfg.h;
        const long double down = loss_term<long double>(ctx, term, xp);
        xp[i] = keep;
        fd.push_back(static_cast<double>((up - down) / (2.0L * cfg.h)));
      }
      accumulate(tc, a, fd);
      tc.parameters = static_cast<int>(idx.size());
    }
    tc.passed = tc.max_rel_err < cfg.tolerance && tc.checked > 0;
    rep.terms.push_back(tc);
  }
  rep.passed = std::all_of(rep.terms.begin(), rep.terms.end(), [](const TermCheck& t) { return t.passed; });
  return rep;
}

}  // namespace lanespline
