#pragma once

// Finite-difference check of every loss term's analytic gradient at random
// parameter states of a generic synthetic scene.

#include <cstdint>
#include <optional>
#include <vector>

#include "lanespline/losses.hpp"

namespace lanespline {

struct GradcheckConfig {
  std::uint64_t seed = 0;
  int states = 10;
  double h = 1e-6;
  double tolerance = 1e-4;
  std::optional<LossTerm> flip;  // negates one term's analytic gradient
};

struct TermCheck {
  LossTerm term = LossTerm::Presence;
  double max_rel_err = 0.0;
  int checked = 0;  // entries above the gradient floor, summed over states
  int parameters = 0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<TermCheck> terms;
  bool passed = false;
};

// Scene and context shared by the checks. Curvature floors are zero so the
// curvature hinge is active.
SceneGroundTruth gradcheck_scene(std::uint64_t seed);
LossContext gradcheck_context(std::uint64_t seed);

GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace lanespline
