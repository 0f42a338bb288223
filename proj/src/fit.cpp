#include "lanespline/fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lanespline {

void FitConfig::validate() const {
  if (steps < 1) throw InvalidConfiguration("steps must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidConfiguration("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidConfiguration("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw InvalidConfiguration("Adam epsilon must be positive");
  if (!(divergence_threshold > 0.0)) throw InvalidConfiguration("divergence threshold must be positive");
  weights.validate();
}

PriorConfig FitConfig::effective_prior() const {
  PriorConfig p = prior;
  if (!priors.par) p.lambda_par = 0.0;
  if (!priors.sm) p.lambda_sm = 0.0;
  if (!priors.curv) p.lambda_curv = 0.0;
  return p;
}

std::vector<LaneHypothesis> initial_hypotheses(const LossContext& ctx, const FitConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const ParamLayout& L = ctx.layout;
  std::vector<LaneHypothesis> hyps;
  hyps.reserve(static_cast<std::size_t>(L.hypotheses));
  for (int h = 0; h < L.hypotheses; ++h) {
    LaneHypothesis hy = LaneHypothesis::zeros(h, L.control_points, L.categories);
    for (auto& a : hy.alpha) a = cfg.init_jitter * gauss(rng);
    for (auto& b : hy.beta) b = cfg.init_jitter * gauss(rng);
    std::fill(hy.gamma.begin(), hy.gamma.end(), cfg.init_visibility);
    hyps.push_back(std::move(hy));
  }
  return hyps;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale <= kGradientFloor) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradientCheck check_gradient(const LossContext& ctx, std::span<const double> params, double h) {
  const ParamLayout& L = ctx.layout;
  std::vector<int> idx;
  for (int r : ctx.representatives)
    for (int o = L.alpha(r); o < L.alpha(r) + L.stride(); ++o) idx.push_back(o);
  const LossEvaluation ev = loss_and_gradient(ctx, params);
  // Differences in extended precision keep round-off below the step error.
  std::vector<long double> x(params.begin(), params.end());
  GradientCheck out;
  for (int i : idx) {
    const long double keep = x[i];
    x[i] = keep + h;
    const long double up = total_loss<long double>(ctx, x).total;
    x[i] = keep - h;
    const long double down = total_loss<long double>(ctx, x).total;
    x[i] = keep;
    const double fd = static_cast<double>((up - down) / (2.0L * h));
    if (std::max(std::abs(fd), std::abs(ev.gradient[i])) > kGradientFloor) ++out.checked;
    out.max_rel_err = std::max(out.max_rel_err, relative_error(ev.gradient[i], fd));
  }
  return out;
}

FitReport fit_scene(const SceneGroundTruth& scene, const FitConfig& cfg) {
  cfg.validate();
  if (scene.lanes.empty()) throw InvalidInput("scene has no ground-truth lanes");
  FitReport rep;
  rep.context = make_loss_context(make_proposal_set(cfg.proposals), scene, cfg.weights,
                                  cfg.effective_prior(), cfg.match);
  LossContext& ctx = rep.context;
  if (scene.features && scene.depth && cfg.weights.lambda_surf != 0.0) {
    const FrustumCloud cloud =
        lift_features(*scene.features, *scene.depth, scene.camera,
                      hypothesis_planes(scene.depth->channels));
    ctx.surface = scene_surface_loss(scene, splat_to_bev(cloud, BevGridConfig{}));
  }

  std::vector<double> x = pack(initial_hypotheses(ctx, cfg), ctx.layout);
  std::vector<double> m(x.size(), 0.0), v(x.size(), 0.0);
  double b1t = 1.0, b2t = 1.0;
  rep.history.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    const LossEvaluation ev = loss_and_gradient(ctx, x);
    if (!std::isfinite(ev.loss.total) || ev.loss.total > cfg.divergence_threshold)
      throw DivergenceError(step, "loss diverged at step " + std::to_string(step));
    rep.history.push_back(ev.loss);
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double g = ev.gradient[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      x[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps);
    }
  }
  for (std::size_t s = 50; s < rep.history.size(); s += 50)
    if (rep.history[s].total > rep.history[s - 50].total) ++rep.window_violations;

  rep.final_loss = total_loss<double>(ctx, x);
  if (!std::isfinite(rep.final_loss.total) || rep.final_loss.total > cfg.divergence_threshold)
    throw DivergenceError(cfg.steps, "loss diverged after the last step");
  std::vector<LaneHypothesis> like(static_cast<std::size_t>(ctx.layout.hypotheses));
  for (int h = 0; h < ctx.layout.hypotheses; ++h) like[h].proposal = h;
  rep.hypotheses = unpack(x, ctx.layout, like);
  if (cfg.gradient_check) rep.check = check_gradient(ctx, x, cfg.fd_step);
  rep.params = std::move(x);
  return rep;
}

std::vector<GtLane> fitted_lanes(const FitReport& report, int samples, bool all_visible) {
  if (samples < 2) throw InvalidConfiguration("need at least two samples per lane");
  std::vector<GtLane> out;
  const auto& names = category_names();
  for (int h : report.context.representatives) {
    const LaneHypothesis& hy = report.hypotheses.at(static_cast<std::size_t>(h));
    const LaneProposal& p = report.context.proposals.at(static_cast<std::size_t>(h));
    const BSplineCurve<double> c = realize_curve(p, hy);
    GtLane lane;
    for (double t : uniform_parameters(samples)) {
      lane.points.push_back(c.eval(t));
      lane.visibility.push_back(all_visible || visibility_prob(p, hy, t) > 0.5 ? 1 : 0);
    }
    const auto best = std::max_element(hy.category_logits.begin(), hy.category_logits.end());
    lane.category = names.at(static_cast<std::size_t>(best - hy.category_logits.begin()));
    out.push_back(std::move(lane));
  }
  return out;
}

}  // namespace lanespline
