#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "tslp/instance.hpp"

namespace tslp {

/// min objective'x  s.t. rows, lower <= x <= upper. Bounds may be infinite.
struct LinearProgram {
  Vector objective;
  std::vector<LinearRow> rows;
  Vector lower;
  Vector upper;

  std::size_t num_cols() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

struct ToleranceSet {
  double feasibility = 1e-8;
  double complementarity = 1e-8;
  double gap = 1e-8;
  double pivot = 1e-9;
  /// Largest tolerated growth of |B^-1| entries before declaring breakdown.
  double breakdown = 1e12;
  std::size_t iteration_limit = 0;  // 0: automatic, 100 * (rows + cols) + 1000
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  /// Row duals y with reduced costs d = c - A'y. A <= row has y <= 0 at an
  /// optimum, a >= row has y >= 0.
  Vector duals;
  Vector reduced_costs;
  std::size_t iterations = 0;

  // Certification residuals, measured on the unscaled data.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
};

/// Dense bounded-variable revised simplex. The constraint matrix is scaled
/// once at construction; right-hand sides and costs may be replaced between
/// solves, which is how per-scenario subproblems reuse one instance.
///
/// Each solve is two-phase from an artificial basis. Pricing is Dantzig
/// until no objective progress is made for 2 * (rows + cols) iterations,
/// then Bland's rule. Not thread-safe; use one instance per thread.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearProgram& lp, ToleranceSet tol = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  void set_rhs(std::size_t row, double value);
  void set_objective(std::size_t col, double value);

  /// Throws IterationLimit or NumericalBreakdown.
  LpSolution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LinearProgram& lp, const ToleranceSet& tol = {});

// ---------------------------------------------------------------------------
// Second-stage subproblems

struct SecondStageResult {
  double value = 0.0;       // Q(x; xi)
  Vector dual;              // u, length r
  Vector subgradient;       // -T(xi)'u, length n
};

/// Reusable second-stage model for one problem: W and bounds are fixed, only
/// the scenario's (T, q, h) and x change between calls.
class SecondStageSolver {
 public:
  explicit SecondStageSolver(const TwoStageProblem& problem, ToleranceSet tol = {});

  /// Throws SecondStageInfeasible / SecondStageUnbounded.
  SecondStageResult solve(const Scenario& scenario, std::span<const double> x);

 private:
  const TwoStageProblem* problem_;
  SimplexSolver simplex_;
  Vector tx_;
  Vector h_;
  Vector q_;
};

SecondStageResult solve_second_stage(const TwoStageProblem& problem, const Scenario& scenario,
                                     std::span<const double> x);

}  // namespace tslp
