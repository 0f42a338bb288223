#pragma once

// Desk-scale stand-in for network training: Adam on the hypothesis
// parameters of one scene against the full training objective.

#include <cstdint>
#include <optional>
#include <vector>

#include "lanespline/losses.hpp"

namespace lanespline {

struct PriorSwitches {
  bool par = true;
  bool sm = true;
  bool curv = true;

  static PriorSwitches none() { return {false, false, false}; }
};

struct FitConfig {
  double learning_rate = 2e-4;
  int steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  PriorSwitches priors;
  LossWeights weights;
  PriorConfig prior;
  MatchConfig match;
  ProposalSetConfig proposals = ProposalSetConfig::defaults();
  double divergence_threshold = 1e6;
  double init_jitter = 1e-3;    // sd of the initial deflections, m
  double init_visibility = 1.0; // initial gamma: every point starts visible
  bool gradient_check = true;
  double fd_step = 1e-6;

  void validate() const;
  PriorConfig effective_prior() const;
};

struct GradientCheck {
  double max_rel_err = 0.0;
  int checked = 0;  // entries with max(|analytic|, |fd|) above the floor
};

struct FitReport {
  std::vector<LossBreakdown<double>> history;  // loss before each step
  LossContext context;
  std::vector<LaneHypothesis> hypotheses;      // final
  std::vector<double> params;                  // final, packed
  LossBreakdown<double> final_loss;
  GradientCheck check;
  int window_violations = 0;  // 50-step windows whose loss went up
};

std::vector<LaneHypothesis> initial_hypotheses(const LossContext& ctx, const FitConfig& cfg);

FitReport fit_scene(const SceneGroundTruth& scene, const FitConfig& cfg);

// Analytic vs central-difference gradient of total_loss over the parameter
// blocks of the prior lanes (alpha, beta, gamma, logits).
GradientCheck check_gradient(const LossContext& ctx, std::span<const double> params,
                             double h = 1e-6);

// Relative error used by every gradient check.
inline constexpr double kGradientFloor = 1e-8;
double relative_error(double analytic, double numeric);

// Representative lanes of a fit sampled at `samples` uniform parameters,
// left to right. Visibility comes from the visibility spline unless
// all_visible is set.
std::vector<GtLane> fitted_lanes(const FitReport& report, int samples = 100,
                                 bool all_visible = false);

}  // namespace lanespline
