#include <algorithm>
#include <string>

#include "tslp/error.hpp"
#include "tslp/lp.hpp"

namespace tslp {

namespace {

LinearProgram recourse_program(const TwoStageProblem& p) {
  LinearProgram lp;
  lp.objective = p.base_q;
  lp.lower = p.y_lower;
  lp.upper = p.y_upper;
  lp.rows.resize(p.r());
  for (std::size_t i = 0; i < p.r(); ++i) {
    lp.rows[i].coefficients = p.W.rows[i];
    lp.rows[i].sense = p.recourse_sense[i];
    lp.rows[i].rhs = p.base_h[i];
  }
  return lp;
}

}  // namespace

SecondStageSolver::SecondStageSolver(const TwoStageProblem& problem, ToleranceSet tol)
    : problem_(&problem), simplex_(recourse_program(problem), tol) {}

SecondStageResult SecondStageSolver::solve(const Scenario& scenario, std::span<const double> x) {
  const TwoStageProblem& p = *problem_;
  const std::size_t n = p.n(), r = p.r();

  q_ = p.base_q;
  h_ = p.base_h;
  tx_.assign(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) tx_[i] = p.base_T.rows[i].dot(x);

  // T overrides are applied as corrections to the baseline product; when an
  // address repeats, the last override wins (same as realize()).
  struct TDelta {
    std::size_t row, col;
    double delta;
  };
  std::vector<TDelta> t_changes;
  for (std::size_t k = 0; k < scenario.overrides.size(); ++k) {
    const Override& o = scenario.overrides[k];
    switch (o.at.target) {
      case StochasticTarget::q: q_[o.at.col] = o.value; break;
      case StochasticTarget::h: h_[o.at.row] = o.value; break;
      case StochasticTarget::T: {
        bool later = false;
        for (std::size_t k2 = k + 1; k2 < scenario.overrides.size(); ++k2)
          if (scenario.overrides[k2].at == o.at) later = true;
        if (later) break;
        const double delta = o.value - p.base_T.rows[o.at.row].at(o.at.col);
        t_changes.push_back({o.at.row, o.at.col, delta});
        tx_[o.at.row] += delta * x[o.at.col];
        break;
      }
    }
  }

  for (std::size_t i = 0; i < r; ++i) simplex_.set_rhs(i, h_[i] - tx_[i]);
  for (std::size_t j = 0; j < q_.size(); ++j) simplex_.set_objective(j, q_[j]);
  const LpSolution sol = simplex_.solve();
  if (sol.status == LpStatus::Infeasible)
    throw Error(ErrorCode::SecondStageInfeasible,
                "second-stage problem infeasible (relatively complete recourse violated)");
  if (sol.status == LpStatus::Unbounded)
    throw Error(ErrorCode::SecondStageUnbounded, "second-stage problem unbounded");

  SecondStageResult out;
  out.value = sol.objective;
  out.dual = sol.duals;
  out.subgradient.assign(n, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    const double u = out.dual[i];
    if (u == 0.0) continue;
    const auto& row = p.base_T.rows[i];
    for (std::size_t k = 0; k < row.size(); ++k) out.subgradient[row.index[k]] -= row.value[k] * u;
  }
  for (const auto& d : t_changes) out.subgradient[d.col] -= d.delta * out.dual[d.row];
  return out;
}

SecondStageResult solve_second_stage(const TwoStageProblem& problem, const Scenario& scenario,
                                     std::span<const double> x) {
  SecondStageSolver solver(problem);
  return solver.solve(scenario, x);
}

}  // namespace tslp
