#include <cmath>
#include <string>

#include "tslp/error.hpp"
#include "tslp/instance.hpp"
#include "tslp/lp.hpp"
#include "tslp/rng.hpp"

namespace tslp {

namespace {

SparseRow unit_row(std::size_t col, double v) {
  SparseRow r;
  r.index.push_back(col);
  r.value.push_back(v);
  return r;
}

}  // namespace

TwoStageProblem gen_inventory(const InventoryParams& p) {
  const std::size_t n = p.items;
  if (n == 0) throw Error(ErrorCode::BadParameter, "inventory needs at least one item");
  if (p.price.size() != n || p.holding.size() != n || p.selling.size() != n)
    throw Error(ErrorCode::BadParameter, "price/holding/selling vectors must have one entry per item");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.price[i] > 0.0) || !(p.holding[i] > 0.0) || !(p.selling[i] > 0.0))
      throw Error(ErrorCode::BadParameter, "prices, holding and selling costs must be positive");
  }
  if (!(p.ratio > 0.0 && p.ratio < 1.0))
    throw Error(ErrorCode::BadParameter, "ratio r must lie in (0, 1)");
  if (!(p.budget > 0.0)) throw Error(ErrorCode::BadParameter, "budget must be positive");
  if (p.customers.empty()) throw Error(ErrorCode::BadParameter, "customer table is empty");
  for (const auto& [prob, row] : p.customers) {
    if (row.size() != n)
      throw Error(ErrorCode::BadParameter, "customer row length differs from item count");
    for (double c : row)
      if (!(c >= 0.0)) throw Error(ErrorCode::BadParameter, "customer counts must be nonnegative");
    if (!(prob >= 0.0)) throw Error(ErrorCode::BadParameter, "negative customer probability");
  }

  TwoStageProblem prob;
  prob.name = "inventory";
  prob.c.resize(n);
  prob.x_lower.assign(n, 0.0);
  prob.x_upper.resize(n);
  LinearRow budget;
  budget.name = "budget";
  budget.sense = RowSense::LessEqual;
  budget.rhs = p.budget;
  for (std::size_t i = 0; i < n; ++i) {
    prob.c[i] = p.price[i] + p.holding[i];
    prob.x_upper[i] = p.budget / p.price[i];
    prob.x_names.push_back("buy" + std::to_string(i + 1));
    budget.coefficients.index.push_back(i);
    budget.coefficients.value.push_back(p.price[i]);
  }
  prob.first_stage_rows.push_back(budget);

  // Rows 0..n-1: y_i - x_i <= 0. Rows n..2n-1: y_i <= r c_i(xi).
  prob.W.cols = n;
  prob.base_T.cols = n;
  prob.y_lower.assign(n, 0.0);
  prob.y_upper.assign(n, kInf);
  prob.base_q.resize(n);
  prob.base_h.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prob.W.rows.push_back(unit_row(i, 1.0));
    prob.base_T.rows.push_back(unit_row(i, -1.0));
    prob.recourse_sense.push_back(RowSense::LessEqual);
    prob.recourse_row_names.push_back("stock" + std::to_string(i + 1));
    prob.base_q[i] = -p.selling[i];
    prob.y_names.push_back("sell" + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    prob.W.rows.push_back(unit_row(i, 1.0));
    prob.base_T.rows.emplace_back();
    prob.recourse_sense.push_back(RowSense::LessEqual);
    prob.recourse_row_names.push_back("demand" + std::to_string(i + 1));
    prob.base_h[n + i] = p.ratio * p.customers.front().second[i];
  }

  FiniteList fl;
  for (const auto& [probability, row] : p.customers) {
    Scenario s;
    s.weight = probability;
    for (std::size_t i = 0; i < n; ++i)
      s.overrides.push_back({{StochasticTarget::h, n + i, 0}, p.ratio * row[i]});
    fl.scenarios.push_back(std::move(s));
  }
  prob.distribution = std::move(fl);
  check_probabilities(prob.distribution);
  return prob;
}

TwoStageProblem tiny_inventory() {
  InventoryParams p;
  p.items = 1;
  p.price = {1.0};
  p.holding = {0.1};
  p.budget = 10.0;
  p.selling = {2.0};
  p.ratio = 0.5;
  p.customers = {{0.5, {2.0}}, {0.5, {4.0}}};
  auto prob = gen_inventory(p);
  prob.name = "tiny_inventory";
  return prob;
}

TwoStageProblem tiny_inventory_deterministic() {
  InventoryParams p;
  p.items = 1;
  p.price = {1.0};
  p.holding = {0.1};
  p.budget = 10.0;
  p.selling = {2.0};
  p.ratio = 0.5;
  p.customers = {{1.0, {2.0}}};
  auto prob = gen_inventory(p);
  prob.name = "tiny_inventory_deterministic";
  return prob;
}

TwoStageProblem gen_inventory_random(std::size_t items, std::size_t scenarios, std::uint64_t seed) {
  if (items == 0 || scenarios == 0)
    throw Error(ErrorCode::BadParameter, "items and scenarios must be positive");
  CounterRng rng(seed, 0x1a7e);
  InventoryParams p;
  p.items = items;
  double spend = 0.0;
  for (std::size_t i = 0; i < items; ++i) {
    const double price = rng.uniform(1.0, 3.0);
    p.price.push_back(price);
    p.holding.push_back(price * rng.uniform(0.05, 0.3));
    p.selling.push_back(price * rng.uniform(1.3, 2.5));
    spend += price;
  }
  p.budget = spend * rng.uniform(4.0, 8.0);
  p.ratio = rng.uniform(0.3, 0.8);
  const double w = 1.0 / static_cast<double>(scenarios);
  for (std::size_t s = 0; s < scenarios; ++s) {
    Vector row(items);
    for (auto& c : row) c = std::floor(rng.uniform(0.0, 20.0));
    p.customers.emplace_back(w, std::move(row));
  }
  auto prob = gen_inventory(p);
  prob.name = "inventory_random";
  return prob;
}

TwoStageProblem gen_random(const RandomInstanceParams& params) {
  const std::size_t n = params.n, r = params.recourse_rows, e = params.extra_columns;
  if (n == 0 || r == 0 || params.scenarios == 0)
    throw Error(ErrorCode::BadParameter, "random instance needs n, rows and scenarios >= 1");
  CounterRng rng(params.seed, 0x7a5d);
  TwoStageProblem p;
  p.name = "random";
  p.c.resize(n);
  p.x_lower.assign(n, 0.0);
  p.x_upper.resize(n);
  LinearRow cap;
  cap.name = "capacity";
  cap.sense = RowSense::LessEqual;
  double full = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    p.c[j] = rng.uniform(-2.0, 1.0);
    p.x_upper[j] = rng.uniform(1.0, 10.0);
    p.x_names.push_back("x" + std::to_string(j + 1));
    const double a = rng.uniform(0.5, 2.0);
    cap.coefficients.index.push_back(j);
    cap.coefficients.value.push_back(a);
    full += a * p.x_upper[j];
  }
  cap.rhs = 0.5 * full;
  p.first_stage_rows.push_back(cap);

  const std::size_t l = 2 * r + e;
  p.W.cols = l;
  p.base_T.cols = n;
  p.base_q.resize(l);
  p.y_lower.assign(l, 0.0);
  p.y_upper.assign(l, kInf);
  for (std::size_t j = 0; j < l; ++j) p.y_names.push_back("y" + std::to_string(j + 1));
  for (std::size_t i = 0; i < r; ++i) {
    SparseRow w;
    w.index.push_back(i);
    w.value.push_back(1.0);
    w.index.push_back(r + i);
    w.value.push_back(-1.0);
    for (std::size_t k = 0; k < e; ++k) {
      const double v = std::round(rng.uniform(-1.0, 1.0) * 100.0) / 100.0;
      if (v != 0.0) {
        w.index.push_back(2 * r + k);
        w.value.push_back(v);
      }
    }
    p.W.rows.push_back(std::move(w));
    SparseRow t;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() < 0.3) continue;
      t.index.push_back(j);
      t.value.push_back(std::round(rng.uniform(-1.0, 1.0) * 100.0) / 100.0);
    }
    p.base_T.rows.push_back(std::move(t));
    p.recourse_sense.push_back(RowSense::Equal);
    p.recourse_row_names.push_back("balance" + std::to_string(i + 1));
    p.base_h.push_back(rng.uniform(0.0, 10.0));
  }
  for (std::size_t i = 0; i < r; ++i) {
    p.base_q[i] = rng.uniform(1.0, 4.0);
    p.base_q[r + i] = rng.uniform(1.0, 4.0);
  }
  for (std::size_t k = 0; k < e; ++k) p.base_q[2 * r + k] = rng.uniform(0.1, 2.0);

  FiniteList fl;
  double total = 0.0;
  for (std::size_t s = 0; s < params.scenarios; ++s) {
    Scenario sc;
    sc.weight = rng.uniform(0.2, 1.0);
    total += sc.weight;
    for (std::size_t i = 0; i < r; ++i)
      sc.overrides.push_back({{StochasticTarget::h, i, 0}, rng.uniform(0.0, 10.0)});
    for (std::size_t j = 0; j < n && !p.base_T.rows.empty(); ++j)
      if (p.base_T.rows[0].at(j) != 0.0)
        sc.overrides.push_back({{StochasticTarget::T, 0, j}, rng.uniform(-1.0, 1.0)});
    for (std::size_t k = 0; k < e; ++k)
      sc.overrides.push_back({{StochasticTarget::q, 0, 2 * r + k}, rng.uniform(0.1, 2.0)});
    fl.scenarios.push_back(std::move(sc));
  }
  for (auto& sc : fl.scenarios) sc.weight /= total;
  p.distribution = std::move(fl);
  return p;
}

LinearProgram build_extensive_form(const TwoStageProblem& problem,
                                   const std::vector<Scenario>& scenarios,
                                   std::size_t variable_cap) {
  if (scenarios.empty()) throw Error(ErrorCode::BadInput, "extensive form needs at least one scenario");
  const std::size_t n = problem.n(), l = problem.l(), r = problem.r();
  const std::size_t vars = n + scenarios.size() * l;
  if (vars > variable_cap)
    throw Error(ErrorCode::TooLarge, "extensive form has " + std::to_string(vars) +
                                         " variables, cap is " + std::to_string(variable_cap));
  LinearProgram lp;
  lp.objective.assign(vars, 0.0);
  lp.lower.resize(vars);
  lp.upper.resize(vars);
  for (std::size_t j = 0; j < n; ++j) {
    lp.objective[j] = problem.c[j];
    lp.lower[j] = problem.x_lower[j];
    lp.upper[j] = problem.x_upper[j];
  }
  lp.rows = problem.first_stage_rows;
  lp.rows.reserve(problem.m() + scenarios.size() * r);
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const RealizedScenario data = realize(problem, scenarios[s]);
    const std::size_t off = n + s * l;
    for (std::size_t j = 0; j < l; ++j) {
      lp.objective[off + j] = scenarios[s].weight * data.q[j];
      lp.lower[off + j] = problem.y_lower[j];
      lp.upper[off + j] = problem.y_upper[j];
    }
    for (std::size_t i = 0; i < r; ++i) {
      LinearRow row;
      row.sense = problem.recourse_sense[i];
      row.rhs = data.h[i];
      row.coefficients = data.T.rows[i];
      const auto& w = problem.W.rows[i];
      for (std::size_t k = 0; k < w.size(); ++k) {
        row.coefficients.index.push_back(off + w.index[k]);
        row.coefficients.value.push_back(w.value[k]);
      }
      lp.rows.push_back(std::move(row));
    }
  }
  return lp;
}

}  // namespace tslp
