#include <cmath>
#include <sstream>

#include <json.hpp>

#include "doctest.h"
#include "tslp/error.hpp"
#include "tslp/instance.hpp"
#include "tslp/lp.hpp"
#include "tslp/lshaped.hpp"

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

double f_star_of(const TwoStageProblem& p) {
  const auto sol = solve_lp(build_extensive_form(p, enumerate_scenarios(p.distribution)));
  REQUIRE(sol.status == LpStatus::Optimal);
  return sol.objective;
}

double exact_f(const TwoStageProblem& p, std::span<const double> x) {
  return estimate(p, full_scenario_set(p.distribution), x).value;
}

SolverConfig exact_config(StepSizePolicy policy) {
  SolverConfig c;
  c.exact_oracle = true;
  c.policy = policy;
  c.max_total_inner = 2000;
  return c;
}

std::vector<TwoStageProblem> small_instances() {
  std::vector<TwoStageProblem> out;
  out.push_back(tiny_inventory());
  out.push_back(gen_inventory_random(2, 6, 3));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RandomInstanceParams rp;
    rp.n = 2 + seed % 2;
    rp.scenarios = 6;
    rp.seed = seed;
    out.push_back(gen_random(rp));
  }
  return out;
}

}  // namespace

TEST_CASE("serious test") {
  CHECK(serious_test(0.0, -0.81, -0.81, 0.5) == StepKind::Serious);
  CHECK(serious_test(0.0, 0.0, -0.81, 0.5) == StepKind::Null);
  CHECK(serious_test(1.0, 0.3, 0.3, 0.99) == StepKind::Serious);
  // exact equality counts as serious
  CHECK(serious_test(1.0, 0.5, 0.0, 0.5) == StepKind::Serious);
}

TEST_CASE("step-size policies") {
  CHECK(*next_step_size(ConstantPolicy{2.5}, 0.5, 7, 3.0, 1.0) == 2.5);
  CHECK(*next_step_size(PracticalPolicy{10.0}, 0.5, 0, 1.0, std::nullopt) == 10.0);
  CHECK(*next_step_size(PracticalPolicy{10.0}, 0.5, 3, 1.0, 0.75) == doctest::Approx(2.5));
  CHECK(*next_step_size(PracticalPolicy{10.0}, 0.5, 3, 1.0, 1.5) == 10.0);
  CHECK(*next_step_size(OptimalPolicy{-0.9, 10.0, 0.0}, 0.5, 0, 0.0, {}) == doctest::Approx(0.009));
  CHECK_FALSE(next_step_size(OptimalPolicy{-0.9, 10.0, 0.0}, 0.5, 0, -0.9, {}).has_value());
  CHECK_FALSE(next_step_size(OptimalPolicy{-0.9, 10.0, 0.1}, 0.5, 0, -0.85, {}).has_value());
  CHECK(*next_step_size(SharpConstantPolicy{2.0, 0.5, 0.1}, 0.5, 0, 0.0, {}) == doctest::Approx(5.0));
  CHECK(*next_step_size(SharpOptimalPolicy{1.0, -0.9, 0.0}, 0.5, 0, 0.1, {}) == doctest::Approx(1.0));
  CHECK_FALSE(next_step_size(SharpOptimalPolicy{1.0, -0.9, 0.0}, 0.5, 0, -0.9, {}).has_value());
  CHECK(code_of([] { next_step_size(OptimalPolicy{0.0, std::nullopt, 0.0}, 0.5, 0, 1.0, {}); }) ==
        ErrorCode::MissingParameter);

  CHECK(code_of([] { check_policy(ConstantPolicy{0.0}); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { check_policy(PracticalPolicy{-1.0}); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { check_policy(SharpConstantPolicy{1.0, 1.0, 0.1}); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { check_policy(SharpConstantPolicy{1.0, 0.5, 0.0}); }) == ErrorCode::BadParameter);
  CHECK(policy_name(SharpOptimalPolicy{}) == "sharp-optimal");
}

TEST_CASE("config validation") {
  SolverConfig c;
  c.beta = 1.0;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::BadParameter);
  c.beta = 0.5;
  c.max_total_inner = 0;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::BadParameter);
  c.max_total_inner = 5;
  c.memory = 0;
  CHECK(code_of([&] { check_config(c); }) == ErrorCode::BadParameter);
  c.memory = 5;
  CHECK_NOTHROW(check_config(c));
  c.x0 = Vector{-1.0};
  CHECK(code_of([&] { run(tiny_inventory(), c); }) == ErrorCode::BadParameter);
}

TEST_CASE("tiny instance converges with the exact oracle") {
  auto c = exact_config(ConstantPolicy{1.0});
  c.x0 = Vector{0.0};
  const auto r = run(tiny_inventory(), c);
  CHECK(r.reason == StopReason::StopTolerance);
  REQUIRE(r.best_center.size() == 1);
  CHECK(std::abs(r.best_center[0] - 1.0) <= 1e-6);
  CHECK(std::abs(r.best_value + 0.9) <= 1e-8);

  const auto& first = r.trace.inner.front();
  CHECK(first.delta_tilde == doctest::Approx(0.405));
  CHECK(first.model_trial == doctest::Approx(-0.81));
  CHECK(first.kind == StepKind::Serious);
}

TEST_CASE("every policy converges on the tiny instance") {
  const double fs = -0.9;
  std::vector<StepSizePolicy> pols = {ConstantPolicy{0.5}, OptimalPolicy{fs, std::nullopt, 0.0},
                                      PracticalPolicy{10.0}, SharpConstantPolicy{0.1, 0.5, 0.001},
                                      SharpOptimalPolicy{0.1, fs, 0.0}};  // mu = 0.1 is the sharpness constant
  for (const auto& pol : pols) {
    CAPTURE(policy_name(pol));
    auto c = exact_config(pol);
    c.max_total_inner = 500;
    const auto r = run(tiny_inventory(), c);
    CHECK(r.best_value <= fs + 1e-6);
  }
}

TEST_CASE("deterministic problem gives identical traces across seeds") {
  std::string first;
  for (std::uint64_t seed : {1u, 7u, 12345u}) {
    SolverConfig c;
    c.seed = seed;
    c.sample_size = 4;
    c.policy = PracticalPolicy{5.0};
    const auto r = run(tiny_inventory_deterministic(), c);
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    if (first.empty()) first = os.str();
    CHECK(os.str() == first);
  }
}

TEST_CASE("sampled runs are reproducible and thread-count independent") {
  const auto p = gen_inventory_random(3, 40, 9);
  SolverConfig c;
  c.sample_size = 25;
  c.seed = 42;
  c.max_total_inner = 60;
  std::ostringstream a, b;
  write_trace_csv(a, run(p, c).trace);
  c.threads = 4;
  write_trace_csv(b, run(p, c).trace);
  CHECK(a.str() == b.str());
}

TEST_CASE("inner budget of one gives a one-record trace") {
  SolverConfig c;
  c.max_total_inner = 1;
  const auto r = run(tiny_inventory(), c);
  CHECK(r.trace.inner.size() == 1);
  CHECK(r.reason == StopReason::InnerBudget);
  CHECK(is_budget_stop(r.reason));
  CHECK(r.last_iterates.size() == 1);
}

TEST_CASE("trace structure") {
  const auto p = gen_inventory_random(2, 12, 5);
  SolverConfig c;
  c.sample_size = 8;
  c.max_total_inner = 120;
  c.keep_last = 50;
  const auto r = run(p, c);
  for (const auto& o : r.trace.outer) {
    std::size_t count = 0;
    const InnerRecord* last = nullptr;
    for (const auto& rec : r.trace.inner)
      if (rec.k == o.k) {
        ++count;
        last = &rec;
      }
    CHECK(count == o.inner_steps);
    if (o.completed) {
      REQUIRE(last != nullptr);
      CHECK(last->kind == StepKind::Serious);
    }
  }
  CHECK(r.last_iterates.size() == std::min<std::size_t>(50, r.total_inner));
  for (std::size_t i = 0; i < r.trace.inner.size(); ++i) CHECK(r.trace.inner[i].cum_inner == i + 1);
}

TEST_CASE("trace csv and summary") {
  auto c = exact_config(ConstantPolicy{1.0});
  c.x0 = Vector{0.0};
  const auto r = run(tiny_inventory(), c);
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  const std::string csv = os.str();
  CHECK(csv.rfind("k,t,kind,rho,fhat_center,fhat_trial,model_trial,delta_tilde,step_norm,cum_inner,wall_ms\n", 0) == 0);
  CHECK(csv.find("0,0,serious,1,0,") != std::string::npos);

  const auto j = nlohmann::json::parse(summary_document(r, c));
  CHECK(j["stop_reason"] == "stop_tolerance");
  CHECK(j["policy"]["name"] == "constant");
  CHECK(j["best_value"].get<double>() == doctest::Approx(-0.9));
}

TEST_CASE("exact proximal gap") {
  const auto p = tiny_inventory();
  const Vector c0{0.0};
  const auto g = exact_proximal_gap(p, c0, 1.0);
  // min over [0,1] of -0.9x + x^2/2 is -0.405 at x = 0.9
  CHECK(g.delta == doctest::Approx(0.405).epsilon(1e-9));
  CHECK(g.x_prox[0] == doctest::Approx(0.9));
  CHECK(g.delta <= g.delta_upper + 1e-12);

  const Vector xs{1.0};
  CHECK(std::abs(exact_proximal_gap(p, xs, 1.0).delta) <= 1e-8);
  CHECK(std::abs(exact_proximal_gap(p, xs, 0.01).delta) <= 1e-8);

  // grid check of the prox minimum for a center off the kink
  const Vector c1{3.0};
  const auto g1 = exact_proximal_gap(p, c1, 0.7);
  double best = kInf;
  for (int i = 0; i <= 100000; ++i) {
    const double x = 10.0 * i / 100000.0;
    const Vector xv{x};
    best = std::min(best, exact_f(p, xv) + 0.35 * (x - 3.0) * (x - 3.0));
  }
  CHECK(g1.delta == doctest::Approx(exact_f(p, c1) - best).epsilon(1e-6));

  double prev = kInf;
  for (double rho : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double d = exact_proximal_gap(p, c0, rho).delta;
    CHECK(d >= -1e-9);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
  CHECK(prev <= 1e-5);
  CHECK(code_of([&] { exact_proximal_gap(p, c0, 1.0, 1e-10, 1.0); }) == ErrorCode::EnumerationCapExceeded);
}

TEST_CASE("theory bound examples") {
  TheoryInputs in;
  in.beta = 0.5;
  in.eps1 = in.eps2 = 0.01;
  in.f0 = 0.0;
  in.f_star = -0.9;
  const auto opt = theory_bounds(in, BoundFamily::Optimal);
  CHECK(opt.eps_bar == doctest::Approx(0.03));
  CHECK(opt.delta == doctest::Approx(0.24));
  REQUIRE(opt.outer);
  CHECK(*opt.outer == 10.0);
  CHECK_FALSE(opt.total_inner);

  CHECK(code_of([&] { theory_bounds(in, BoundFamily::Constant); }) == ErrorCode::MissingParameter);
  in.rho = 1.0;
  in.D = 10.0;
  in.G = 2.0;
  const auto con = theory_bounds(in, BoundFamily::Constant);
  CHECK(con.delta == doctest::Approx(std::max(0.24, std::sqrt(0.24) * 10.0)));
  CHECK(*con.outer == 0.0);
  CHECK(*con.inner_per_outer == std::ceil(8.0 * 4.0 / (0.25 * 0.03) - 64.0) + 1.0);

  TheoryInputs ex = in;
  ex.eps1 = ex.eps2 = 0.0;
  const auto e = theory_bounds(ex, BoundFamily::Constant);
  CHECK(e.exact_oracle);
  CHECK(e.delta == 0.0);
  CHECK_FALSE(e.outer);

  in.mu = 0.5;
  CHECK(code_of([&] { theory_bounds(in, BoundFamily::SharpConstant); }) == ErrorCode::MissingParameter);
  in.v = 0.5;
  const auto sc = theory_bounds(in, BoundFamily::SharpConstant);
  CHECK(sc.delta == doctest::Approx(0.24));
  // A = max{1, ceil((0.9 - 0.24)/(1 * 0.03)) + 1} = 23
  CHECK(*sc.outer == 23.0);
  in.v = 0.25;
  const auto sc2 = theory_bounds(in, BoundFamily::SharpConstant);
  // A = ceil(0.66/(3 * 0.03)) + 1 = 9; extra = ceil(-ln 3 / ln 0.75) = 4
  CHECK(*sc2.outer == 9.0 + 4.0 + 1.0);

  const auto so = theory_bounds(in, BoundFamily::SharpOptimal);
  // arg = (0.9 - 0.18)/0.06 = 12; ceil(-ln 12 / ln 0.75) = 9
  CHECK(*so.outer == 9.0);
}

TEST_CASE("inner-loop and proximal-gap bound helpers") {
  CHECK(inner_loop_bound(1.0, 1.0, 0.5, 0.0) == kInf);
  CHECK(inner_loop_bound(1.0, 1.0, 0.5, 0.5) == std::ceil(8.0 / (0.25 * 0.5) - 64.0) + 1.0);
  CHECK(inner_loop_bound(0.1, 1.0, 0.5, 1.0) == 1.0);
  CHECK(proximal_gap_lower_bound(0.9, 1.0, 10.0) == doctest::Approx(0.81 / 200.0));
  CHECK(proximal_gap_lower_bound(4.0, 1.0, 1.0) == 2.0);
  CHECK(*sharp_gap_lower_bound(1.0, 1.0, 0.5) == doctest::Approx(0.125));
  CHECK_FALSE(sharp_gap_lower_bound(0.1, 1.0, 0.5));
}

TEST_CASE("trace invariants hold on sampled and exact runs") {
  for (const auto& p : small_instances()) {
    for (double rho : {0.1, 1.0, 10.0}) {
      SolverConfig c;
      c.sample_size = 5;
      c.policy = ConstantPolicy{rho};
      c.max_total_inner = 150;
      const auto r = run(p, c);
      const auto v = check_trace(r.trace, c.beta, r.empirical_G);
      CHECK(v.empty());
      c.exact_oracle = true;
      const auto re = run(p, c);
      CHECK(check_trace(re.trace, c.beta, re.empirical_G).empty());
    }
  }
}

TEST_CASE("exact-oracle inner-loop bound and proximal-gap lower bound") {
  for (const auto& p : small_instances()) {
    const double fs = f_star_of(p);
    const double D = validate(p).diameter;
    for (double rho : {0.2, 2.0}) {
      auto c = exact_config(ConstantPolicy{rho});
      c.max_total_inner = 300;
      const auto r = run(p, c);
      for (const auto& o : r.trace.outer) {
        if (!o.completed) continue;
        const auto gap = exact_proximal_gap(p, o.center, rho);
        const double fgap = o.fhat_center - fs;
        CHECK(gap.delta >= proximal_gap_lower_bound(fgap, rho, D) - 1e-8);
        if (gap.delta > 1e-7)
          CHECK(static_cast<double>(o.inner_steps) <= inner_loop_bound(r.empirical_G, rho, c.beta, gap.delta));
      }
    }
  }
}

TEST_CASE("optimal policy decays the gap linearly") {
  for (const auto& p : small_instances()) {
    const double fs = f_star_of(p);
    auto c = exact_config(OptimalPolicy{fs, std::nullopt, 0.0});
    c.max_total_inner = 400;
    const auto r = run(p, c);
    double prev = kInf;
    for (const auto& o : r.trace.outer) {
      const double gap = o.fhat_center - fs;
      if (std::isfinite(prev)) CHECK(gap <= (1.0 - c.beta / 4.0) * prev + 1e-9);
      prev = gap;
    }
  }
}

TEST_CASE("optimal policy with vanishing rho keeps the prox solver stable") {
  // rho falls below 1e-6 here and the aggregate cuts become nearly parallel;
  // this run used to stall the active-set method and then hit a singular KKT system
  const auto p = gen_inventory_random(6, 29, 319);
  const double fs = f_star_of(p);
  auto c = exact_config(OptimalPolicy{fs, std::nullopt, 0.0});
  c.max_total_inner = 33000;
  RunResult r;
  CHECK_NOTHROW(r = run(p, c));
  CHECK(check_trace(r.trace, c.beta, r.empirical_G).empty());

  c.memory = 20;
  const auto r20 = run(p, c);
  CHECK(r20.reason == StopReason::PolicyTerminate);
  CHECK(r20.best_value - fs <= 1e-6);
}
