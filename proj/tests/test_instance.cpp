#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "tslp/error.hpp"
#include "tslp/instance.hpp"
#include "tslp/lp.hpp"
#include "tslp/rng.hpp"

using namespace tslp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

double closed_form_f(double x) { return 1.1 * x - std::min(x, 1.0) - std::min(x, 2.0); }

/// f(x) = c'x + sum_s p_s Q(x; s), every scenario solved.
double exhaustive_f(const TwoStageProblem& p, const Vector& x) {
  double v = dot(p.c, x);
  for (const auto& s : enumerate_scenarios(p.distribution)) v += s.weight * solve_second_stage(p, s, x).value;
  return v;
}

}  // namespace

TEST_CASE("validate the tiny instance") {
  const auto rep = validate(tiny_inventory());
  CHECK(rep.diameter == doctest::Approx(10.0));
  CHECK(rep.scenario_count == 2.0);
  REQUIRE(rep.feasible_point.size() == 1);
  CHECK(rep.feasible_point[0] >= 0.0);
  CHECK(rep.feasible_point[0] <= 10.0);
}

TEST_CASE("validate rejects unbounded and empty first stages") {
  auto p = tiny_inventory();
  p.first_stage_rows.clear();
  p.x_lower = {-kInf};
  p.x_upper = {kInf};
  CHECK(code_of([&] { validate(p); }) == ErrorCode::UnboundedFirstStage);

  // A bounding row is enough once presolve tightens the upper bound.
  auto q = tiny_inventory();
  q.x_upper = {kInf};
  CHECK(validate(q).diameter == doctest::Approx(10.0));

  auto e = tiny_inventory();
  e.first_stage_rows[0].sense = RowSense::GreaterEqual;
  e.first_stage_rows[0].rhs = 20.0;
  CHECK(code_of([&] { validate(e); }) == ErrorCode::EmptyFeasibleSet);
}

TEST_CASE("validate rejects bad probabilities") {
  auto p = tiny_inventory();
  auto& fl = std::get<FiniteList>(p.distribution);
  fl.scenarios[0].weight = 0.5;
  fl.scenarios[1].weight = 0.4;
  CHECK(code_of([&] { validate(p); }) == ErrorCode::BadProbabilities);
  fl.scenarios[1].weight = -0.5;
  fl.scenarios[0].weight = 1.5;
  CHECK(code_of([&] { validate(p); }) == ErrorCode::BadProbabilities);
}

TEST_CASE("tiny instance objective matches the closed form") {
  const auto p = tiny_inventory();
  for (double x = 0.0; x <= 10.0; x += 0.125) CHECK(exhaustive_f(p, {x}) == doctest::Approx(closed_form_f(x)));
  CHECK(exhaustive_f(p, {0.5}) == doctest::Approx(-0.45));

  // Grid brute force on the closed form.
  double best = kInf, arg = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double x = i * 1e-3;
    if (closed_form_f(x) < best - 1e-15) best = closed_form_f(x), arg = x;
  }
  CHECK(best == doctest::Approx(-0.9));
  CHECK(arg == doctest::Approx(1.0));

  const auto d = tiny_inventory_deterministic();
  for (double x = 0.0; x <= 10.0; x += 0.25)
    CHECK(exhaustive_f(d, {x}) == doctest::Approx(1.1 * x - 2.0 * std::min(x, 1.0)));
}

TEST_CASE("extensive form of the tiny instance") {
  const auto p = tiny_inventory();
  const auto scen = enumerate_scenarios(p.distribution);
  const auto lp = build_extensive_form(p, scen);
  CHECK(lp.num_cols() == 3);
  const auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-0.9));
  CHECK(sol.x[0] == doctest::Approx(1.0));

  const auto d = tiny_inventory_deterministic();
  const auto dsol = solve_lp(build_extensive_form(d, enumerate_scenarios(d.distribution)));
  CHECK(dsol.objective == doctest::Approx(-0.9));

  CHECK(code_of([&] { build_extensive_form(p, {}); }) == ErrorCode::BadInput);
  CHECK(code_of([&] { build_extensive_form(p, scen, 2); }) == ErrorCode::TooLarge);
}

TEST_CASE("extensive-form optimum equals the minimum of exhaustively evaluated f") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    RandomInstanceParams rp;
    rp.n = 1 + seed % 5;
    rp.recourse_rows = 2 + seed % 3;
    rp.scenarios = 5 + (seed * 7) % 16;
    rp.seed = seed;
    const auto p = gen_random(rp);
    validate(p);
    const auto sol = solve_lp(build_extensive_form(p, enumerate_scenarios(p.distribution)));
    REQUIRE(sol.status == LpStatus::Optimal);
    const Vector xstar(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(p.n()));
    // The LP optimum is attained by f at its own x ...
    CHECK(exhaustive_f(p, xstar) == doctest::Approx(sol.objective).epsilon(1e-8));
    // ... and no feasible point does better.
    CounterRng rng(seed, 3);
    int tried = 0;
    while (tried < 40) {
      Vector x(p.n());
      for (std::size_t j = 0; j < p.n(); ++j) x[j] = rng.uniform(p.x_lower[j], p.x_upper[j]);
      const auto& cap = p.first_stage_rows[0];
      if (cap.coefficients.dot(x) > cap.rhs) continue;
      ++tried;
      CHECK(exhaustive_f(p, x) >= sol.objective - 1e-8 * (1.0 + std::abs(sol.objective)));
    }
  }
}

TEST_CASE("gen_inventory output always validates") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t items = 1 + rng.below(5);
    const std::size_t scen = 1 + rng.below(8);
    const auto p = gen_inventory_random(items, scen, rng.next_u64());
    const auto rep = validate(p);
    CHECK(rep.diameter > 0.0);
    CHECK(std::isfinite(rep.diameter));
    check_structure(p);
  }
}

TEST_CASE("gen_inventory rejects bad parameters") {
  InventoryParams p;
  p.items = 1;
  p.price = {1.0};
  p.holding = {0.1};
  p.selling = {2.0};
  p.customers = {{1.0, {2.0}}};
  p.ratio = 1.0;
  CHECK(code_of([&] { gen_inventory(p); }) == ErrorCode::BadParameter);
  p.ratio = 0.5;
  p.price = {0.0};
  CHECK(code_of([&] { gen_inventory(p); }) == ErrorCode::BadParameter);
  p.price = {1.0};
  CHECK_NOTHROW(gen_inventory(p));
}

TEST_CASE("realize is idempotent and leaves the baseline alone") {
  RandomInstanceParams rp;
  rp.scenarios = 4;
  const auto p = gen_random(rp);
  const auto before = p;
  for (const auto& s : enumerate_scenarios(p.distribution)) {
    const auto a = realize(p, s);
    auto p2 = p;
    p2.base_T = a.T;
    p2.base_q = a.q;
    p2.base_h = a.h;
    const auto b = realize(p2, s);
    CHECK(a.T == b.T);
    CHECK(a.q == b.q);
    CHECK(a.h == b.h);
  }
  CHECK(p == before);
}

TEST_CASE("enumeration of independent and block distributions") {
  IndependentDiscrete ind;
  ind.marginals.push_back({{StochasticTarget::h, 0, 0}, {1.0, 2.0}, {0.25, 0.75}});
  ind.marginals.push_back({{StochasticTarget::h, 1, 0}, {5.0, 6.0, 7.0}, {0.2, 0.3, 0.5}});
  const ScenarioDistribution d = ind;
  CHECK(joint_scenario_count(d) == 6.0);
  const auto all = enumerate_scenarios(d);
  REQUIRE(all.size() == 6);
  double total = 0.0;
  for (const auto& s : all) total += s.weight;
  CHECK(total == doctest::Approx(1.0));
  CHECK(all[0].weight == doctest::Approx(0.25 * 0.2));
  CHECK(all[5].weight == doctest::Approx(0.75 * 0.5));
  CHECK(code_of([&] { enumerate_scenarios(d, 5.0); }) == ErrorCode::EnumerationCapExceeded);

  BlockDiscrete blk;
  blk.blocks.push_back({"B1", {{0.5, {{{StochasticTarget::h, 0, 0}, 1.0}, {{StochasticTarget::h, 1, 0}, 2.0}}},
                               {0.5, {{{StochasticTarget::h, 0, 0}, 3.0}, {{StochasticTarget::h, 1, 0}, 4.0}}}}});
  const auto bs = enumerate_scenarios(ScenarioDistribution{blk});
  REQUIRE(bs.size() == 2);
  CHECK(bs[1].overrides.size() == 2);

  CHECK(code_of([] {
          IndependentDiscrete bad;
          bad.marginals.push_back({{StochasticTarget::h, 0, 0}, {1.0, 2.0}, {0.5, 0.4}});
          check_probabilities(ScenarioDistribution{bad});
        }) == ErrorCode::BadProbabilities);
}
