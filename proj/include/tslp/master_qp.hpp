#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tslp/bundle.hpp"
#include "tslp/instance.hpp"

namespace tslp {

/// First-stage feasible set X: general rows plus variable bounds.
struct FirstStageRegion {
  std::vector<LinearRow> rows;
  Vector lower;
  Vector upper;

  static FirstStageRegion of(const TwoStageProblem& p) { return {p.first_stage_rows, p.x_lower, p.x_upper}; }
  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x, double tol = 1e-9) const;
};

struct ProxOptions {
  double kkt_tol = 1e-9;
  std::size_t iteration_limit = 0;  // 0: 50 * (constraints + n) + 100
};

/// Working-set hint carried between consecutive prox solves. `x` must lie in
/// X; `active` lists X-constraint indices (rows first, then lower bounds,
/// then upper bounds) that are tight at `x`.
struct ProxWarmStart {
  Vector x;
  std::vector<std::size_t> active;
};

struct ProxResult {
  Vector x;
  double model_value = 0.0;
  double objective = 0.0;    // model_value + rho/2 ||x - center||^2
  double delta_tilde = 0.0;  // f_hat(center) - objective
  /// Multipliers of the cuts (sum to 1) and of the X constraints at exit.
  Vector cut_multipliers;
  Vector region_multipliers;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  ProxWarmStart warm;
};

/// Solves min model(x) + rho/2 ||x - center||^2 over X through its epigraph
/// form in (x, theta) with a primal active-set method. Each working-set step
/// is an equality-constrained QP solved through its dense KKT system. Ties
/// for the blocking constraint go to the lowest index.
///
/// Throws IterationLimit, NumericalBreakdown, or Infeasible when neither the
/// warm start nor the center lies in X.
ProxResult solve_prox_step(const BundleModel& model, std::span<const double> center, double rho,
                           const FirstStageRegion& region, const ProxOptions& opt = {},
                           const ProxWarmStart* warm = nullptr);

}  // namespace tslp
