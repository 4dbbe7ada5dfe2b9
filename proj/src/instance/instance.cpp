#include "tslp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tslp/error.hpp"
#include "tslp/lp.hpp"

namespace tslp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::BadProbabilities: return "BadProbabilities";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::UnboundedFirstStage: return "UnboundedFirstStage";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SecondStageInfeasible: return "SecondStageInfeasible";
    case ErrorCode::SecondStageUnbounded: return "SecondStageUnbounded";
    case ErrorCode::UnsupportedSection: return "UnsupportedSection";
    case ErrorCode::StochasticRecourse: return "StochasticRecourse";
    case ErrorCode::UnknownRowOrColumn: return "UnknownRowOrColumn";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

double SparseRow::dot(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * x[index[k]];
  return s;
}

double SparseRow::at(std::size_t col) const {
  const auto it = std::lower_bound(index.begin(), index.end(), col);
  if (it == index.end() || *it != col) return 0.0;
  return value[static_cast<std::size_t>(it - index.begin())];
}

void SparseRow::set(std::size_t col, double v) {
  const auto it = std::lower_bound(index.begin(), index.end(), col);
  const auto pos = static_cast<std::size_t>(it - index.begin());
  if (it != index.end() && *it == col) {
    value[pos] = v;
    return;
  }
  index.insert(it, col);
  value.insert(value.begin() + static_cast<std::ptrdiff_t>(pos), v);
}

std::size_t SparseMatrix::nonzeros() const {
  std::size_t nz = 0;
  for (const auto& r : rows) nz += r.size();
  return nz;
}

// ---------------------------------------------------------------------------
// Distributions

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_group(const std::vector<double>& probs, const std::string& what, double tol) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw Error(ErrorCode::BadProbabilities, what + " has a negative or non-finite probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > tol)
    throw Error(ErrorCode::BadProbabilities,
                what + " probabilities sum to " + std::to_string(sum) + ", not 1");
}

}  // namespace

void check_probabilities(const ScenarioDistribution& dist, double tol) {
  std::visit(Overloaded{
                 [&](const FiniteList& fl) {
                   if (fl.scenarios.empty())
                     throw Error(ErrorCode::BadProbabilities, "scenario list is empty");
                   std::vector<double> p;
                   for (const auto& s : fl.scenarios) p.push_back(s.weight);
                   check_group(p, "scenario list", tol);
                 },
                 [&](const IndependentDiscrete& ind) {
                   for (std::size_t i = 0; i < ind.marginals.size(); ++i) {
                     const auto& mg = ind.marginals[i];
                     if (mg.values.size() != mg.probabilities.size() || mg.values.empty())
                       throw Error(ErrorCode::BadProbabilities,
                                   "marginal " + std::to_string(i) + " has mismatched tables");
                     check_group(mg.probabilities, "marginal " + std::to_string(i), tol);
                   }
                 },
                 [&](const BlockDiscrete& bd) {
                   for (const auto& b : bd.blocks) {
                     if (b.realizations.empty())
                       throw Error(ErrorCode::BadProbabilities, "block " + b.name + " is empty");
                     std::vector<double> p;
                     for (const auto& r : b.realizations) p.push_back(r.probability);
                     check_group(p, "block " + b.name, tol);
                   }
                 },
             },
             dist);
}

double joint_scenario_count(const ScenarioDistribution& dist) {
  return std::visit(Overloaded{
                        [](const FiniteList& fl) { return static_cast<double>(fl.scenarios.size()); },
                        [](const IndependentDiscrete& ind) {
                          double c = 1.0;
                          for (const auto& mg : ind.marginals) c *= static_cast<double>(mg.values.size());
                          return c;
                        },
                        [](const BlockDiscrete& bd) {
                          double c = 1.0;
                          for (const auto& b : bd.blocks) c *= static_cast<double>(b.realizations.size());
                          return c;
                        },
                    },
                    dist);
}

std::vector<Scenario> enumerate_scenarios(const ScenarioDistribution& dist, double cap) {
  const double count = joint_scenario_count(dist);
  if (count > cap)
    throw Error(ErrorCode::EnumerationCapExceeded,
                "distribution has " + std::to_string(count) + " joint scenarios, cap is " +
                    std::to_string(cap));
  if (const auto* fl = std::get_if<FiniteList>(&dist)) return fl->scenarios;

  // Mixed-radix walk; the last group varies fastest.
  std::vector<std::size_t> radix;
  if (const auto* ind = std::get_if<IndependentDiscrete>(&dist))
    for (const auto& mg : ind->marginals) radix.push_back(mg.values.size());
  else
    for (const auto& b : std::get<BlockDiscrete>(dist).blocks) radix.push_back(b.realizations.size());

  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> digit(radix.size(), 0);
  while (true) {
    Scenario s;
    s.weight = 1.0;
    if (const auto* ind = std::get_if<IndependentDiscrete>(&dist)) {
      for (std::size_t g = 0; g < radix.size(); ++g) {
        const auto& mg = ind->marginals[g];
        s.overrides.push_back({mg.at, mg.values[digit[g]]});
        s.weight *= mg.probabilities[digit[g]];
      }
    } else {
      const auto& bd = std::get<BlockDiscrete>(dist);
      for (std::size_t g = 0; g < radix.size(); ++g) {
        const auto& real = bd.blocks[g].realizations[digit[g]];
        s.overrides.insert(s.overrides.end(), real.overrides.begin(), real.overrides.end());
        s.weight *= real.probability;
      }
    }
    out.push_back(std::move(s));
    std::size_t g = radix.size();
    while (g > 0) {
      --g;
      if (++digit[g] < radix[g]) break;
      digit[g] = 0;
      if (g == 0) return out;
    }
    if (radix.empty()) return out;
  }
}

// ---------------------------------------------------------------------------
// Scenario application

RealizedScenario realize(const TwoStageProblem& problem, const Scenario& scenario) {
  RealizedScenario r{problem.base_T, problem.base_q, problem.base_h};
  for (const auto& o : scenario.overrides) {
    switch (o.at.target) {
      case StochasticTarget::T: r.T.rows.at(o.at.row).set(o.at.col, o.value); break;
      case StochasticTarget::q: r.q.at(o.at.col) = o.value; break;
      case StochasticTarget::h: r.h.at(o.at.row) = o.value; break;
    }
  }
  return r;
}

namespace {

void check_address(const TwoStageProblem& p, const EntryAddress& a, const std::string& where) {
  bool ok = true;
  switch (a.target) {
    case StochasticTarget::T: ok = a.row < p.r() && a.col < p.n(); break;
    case StochasticTarget::q: ok = a.col < p.l(); break;
    case StochasticTarget::h: ok = a.row < p.r(); break;
  }
  if (!ok) throw Error(ErrorCode::BadInput, where + " addresses an entry outside (T, q, h)");
}

void check_row(const SparseRow& row, std::size_t cols, const std::string& where) {
  if (row.index.size() != row.value.size())
    throw Error(ErrorCode::BadInput, where + " has mismatched index/value arrays");
  for (std::size_t k = 0; k < row.index.size(); ++k) {
    if (row.index[k] >= cols) throw Error(ErrorCode::BadInput, where + " column out of range");
    if (k > 0 && row.index[k] <= row.index[k - 1])
      throw Error(ErrorCode::BadInput, where + " column indices not strictly increasing");
    if (!std::isfinite(row.value[k])) throw Error(ErrorCode::BadInput, where + " non-finite value");
  }
}

}  // namespace

void check_structure(const TwoStageProblem& p) {
  const std::size_t n = p.n(), l = p.l(), r = p.r();
  if (n == 0) throw Error(ErrorCode::BadInput, "first stage has no variables");
  if (p.x_lower.size() != n || p.x_upper.size() != n)
    throw Error(ErrorCode::BadInput, "first-stage bound vectors do not match n");
  if (p.y_lower.size() != l || p.y_upper.size() != l)
    throw Error(ErrorCode::BadInput, "recourse bound vectors do not match l");
  if (p.W.rows.size() != r || p.W.cols != l)
    throw Error(ErrorCode::BadInput, "W must be r x l");
  if (p.base_T.rows.size() != r || p.base_T.cols != n)
    throw Error(ErrorCode::BadInput, "T must be r x n");
  if (p.recourse_sense.size() != r)
    throw Error(ErrorCode::BadInput, "recourse sense vector does not match r");
  for (std::size_t i = 0; i < p.m(); ++i)
    check_row(p.first_stage_rows[i].coefficients, n, "first-stage row " + std::to_string(i));
  for (std::size_t i = 0; i < r; ++i) {
    check_row(p.W.rows[i], l, "W row " + std::to_string(i));
    check_row(p.base_T.rows[i], n, "T row " + std::to_string(i));
  }
  for (std::size_t j = 0; j < n; ++j)
    if (p.x_lower[j] > p.x_upper[j])
      throw Error(ErrorCode::BadInput, "first-stage variable " + std::to_string(j) + " has lb > ub");
  for (std::size_t j = 0; j < l; ++j)
    if (p.y_lower[j] > p.y_upper[j])
      throw Error(ErrorCode::BadInput, "recourse variable " + std::to_string(j) + " has lb > ub");
  std::visit(Overloaded{
                 [&](const FiniteList& fl) {
                   for (std::size_t s = 0; s < fl.scenarios.size(); ++s)
                     for (const auto& o : fl.scenarios[s].overrides)
                       check_address(p, o.at, "scenario " + std::to_string(s));
                 },
                 [&](const IndependentDiscrete& ind) {
                   for (std::size_t i = 0; i < ind.marginals.size(); ++i)
                     check_address(p, ind.marginals[i].at, "marginal " + std::to_string(i));
                 },
                 [&](const BlockDiscrete& bd) {
                   for (const auto& b : bd.blocks)
                     for (const auto& real : b.realizations)
                       for (const auto& o : real.overrides) check_address(p, o.at, "block " + b.name);
                 },
             },
             p.distribution);
}

// ---------------------------------------------------------------------------
// Validation

void tighten_bounds(const std::vector<LinearRow>& rows, Vector& lower, Vector& upper, int passes) {
  // Each row contributes one or two "a'x <= b" forms.
  auto apply = [&](const SparseRow& row, double sign, double b) -> bool {
    bool changed = false;
    double finite_min = 0.0;
    std::size_t infinite = 0, inf_index = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double a = sign * row.value[k];
      const std::size_t j = row.index[k];
      const double bound = a > 0.0 ? lower[j] : upper[j];
      if (a == 0.0) continue;
      if (!std::isfinite(bound)) {
        ++infinite;
        inf_index = j;
      } else {
        finite_min += a * bound;
      }
    }
    if (infinite > 1) return false;
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double a = sign * row.value[k];
      const std::size_t j = row.index[k];
      if (a == 0.0) continue;
      double rest;
      if (infinite == 1) {
        if (j != inf_index) continue;
        rest = finite_min;
      } else {
        rest = finite_min - a * (a > 0.0 ? lower[j] : upper[j]);
      }
      const double limit = (b - rest) / a;
      if (a > 0.0 && limit < upper[j]) {
        upper[j] = limit;
        changed = true;
      } else if (a < 0.0 && limit > lower[j]) {
        lower[j] = limit;
        changed = true;
      }
    }
    return changed;
  };
  for (int pass = 0; pass < passes; ++pass) {
    bool changed = false;
    for (const auto& row : rows) {
      if (row.sense != RowSense::GreaterEqual) changed |= apply(row.coefficients, 1.0, row.rhs);
      if (row.sense != RowSense::LessEqual) changed |= apply(row.coefficients, -1.0, -row.rhs);
    }
    if (!changed) break;
  }
}

ValidationReport validate(const TwoStageProblem& problem) {
  check_structure(problem);
  check_probabilities(problem.distribution);

  LinearProgram lp;
  lp.objective.assign(problem.n(), 0.0);
  lp.rows = problem.first_stage_rows;
  lp.lower = problem.x_lower;
  lp.upper = problem.x_upper;
  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::Optimal)
    throw Error(ErrorCode::EmptyFeasibleSet, "first-stage feasible set X is empty");

  ValidationReport report;
  report.feasible_point = sol.x;
  report.tightened_lower = problem.x_lower;
  report.tightened_upper = problem.x_upper;
  tighten_bounds(problem.first_stage_rows, report.tightened_lower, report.tightened_upper);
  double d2 = 0.0;
  for (std::size_t j = 0; j < problem.n(); ++j) {
    const double lo = report.tightened_lower[j], hi = report.tightened_upper[j];
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw Error(ErrorCode::UnboundedFirstStage,
                  "first-stage variable " +
                      (j < problem.x_names.size() ? problem.x_names[j] : std::to_string(j)) +
                      " has no finite bound and none is implied by the rows");
    d2 += (hi - lo) * (hi - lo);
  }
  report.diameter = std::sqrt(d2);
  report.scenario_count = joint_scenario_count(problem.distribution);
  report.notes.push_back("diameter is an over-estimate from variable bounds");
  return report;
}

}  // namespace tslp
