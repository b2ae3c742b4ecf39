#pragma once

// Self-checks run by `msph validate`: boundary residuals, truncation
// convergence, gradient/Jacobian finite-difference agreement and the
// translation addition theorem.

#include <cstdint>
#include <string>
#include <vector>

#include "msph/scene.hpp"

namespace msph {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool gating = true;  // informational rows do not affect the overall verdict
};

struct ResidualStudy {
  double f_hz = 0.0;
  int p_rule = 0;
  double worst_at_rule = 0.0;
  double worst_at_rule_plus4 = 0.0;
  int p_converged = -1;  // first p (rule + 4 n, n >= 0) with worst < tolerance; -1 if none
  double worst_at_converged = 0.0;
};

/// Worst boundary residual at p = rule, rule + 4, ... up to p_max.
ResidualStudy residual_study(const SceneConfig& scene, double f_hz, double tolerance = 1e-3,
                             int p_max = 40);

std::vector<CheckResult> residual_checks(const SceneConfig& scene,
                                         const std::vector<double>& freqs = {500.0, 1000.0,
                                                                             2000.0});

/// Loss gradient and EKF Jacobian against central differences at random states.
std::vector<CheckResult> gradient_checks(const SceneConfig& scene, int states, std::uint64_t seed,
                                         double tolerance = 1e-4);

/// (R|R) and (S|R) re-expansions against direct evaluation at random points.
std::vector<CheckResult> addition_theorem_checks(int cases, int points_per_case,
                                                 std::uint64_t seed, double tolerance = 1e-5);

}  // namespace msph
