#include <cmath>

#include <json.hpp>

#include "doctest.h"
#include "tslp/bounds.hpp"
#include "tslp/error.hpp"
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

double f_star_of(const TwoStageProblem& p) {
  const auto sol = solve_lp(build_extensive_form(p, enumerate_scenarios(p.distribution)));
  REQUIRE(sol.status == LpStatus::Optimal);
  return sol.objective;
}

// Same closed forms, rearranged: log base change through log2, tau^2
// computed first, and the sample count through sigma/eps rather than its square.
struct PlanRef {
  double tau, eps, size, inner, samples;
};
PlanRef plan_ref(double zeta, double ds, double beta, double gap0, double sigma, double G, double D) {
  const double l = std::ceil(std::log2(gap0 / ds) / -std::log2(1.0 - 0.25 * beta));
  const double tau2 = std::max(1.0, 2.0 * std::log(std::max(1.0, 6.0 * l)) - 2.0 * std::log(zeta));
  const double tau = std::sqrt(tau2);
  const double eps = beta * ds / (8.0 * (beta + 1.0) * tau);
  const double r = sigma / eps;
  const double size = std::ceil(std::max(1.0, r * r));
  const double q = (G * D * (beta + 1.0)) / ((1.0 - beta) * beta * ds);
  const double inner = 256.0 / (3.0 * (2.0 - beta / 4.0)) * q * q;
  const double w = sigma * (beta + 1.0) * tau / (beta * ds);
  const double samples = std::max(inner, 16384.0 / (3.0 * (2.0 - beta / 4.0)) * q * q * w * w);
  return {tau, eps, size, inner, samples};
}

}  // namespace

TEST_CASE("summary statistics") {
  const auto b = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(b.mean == doctest::Approx(2.5));
  // t_{0.975,3} = 3.182446305; sd = 1.2909944
  CHECK(*b.half_width == doctest::Approx(3.182446305 * 1.2909944487 / 2.0).epsilon(1e-8));
  CHECK_FALSE(summarize({5.0}).half_width.has_value());
  CHECK(code_of([] { summarize({}); }) == ErrorCode::BadInput);
}

TEST_CASE("SAA lower bound on the deterministic instance is exact") {
  const auto b = saa_lower_bound(tiny_inventory_deterministic(), 5, 10, 3);
  for (double v : b.batch_values) CHECK(v == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(*b.half_width == doctest::Approx(0.0).epsilon(1e-12));
  const auto one = saa_lower_bound(tiny_inventory(), 1, 10, 3);
  CHECK(one.batch_values.size() == 1);
  CHECK_FALSE(one.half_width);
  CHECK(code_of([] { saa_lower_bound(tiny_inventory(), 0, 10, 3); }) == ErrorCode::BadParameter);
}

TEST_CASE("SAA lower bound on the tiny instance") {
  const auto b = saa_lower_bound(tiny_inventory(), 50, 100, 11);
  REQUIRE(b.half_width);
  CHECK(b.mean <= -0.9 + 3.0 * *b.half_width);
  CHECK(std::abs(b.mean + 0.9) <= 3.0 * *b.half_width);
  // thread count does not change values
  const auto b4 = saa_lower_bound(tiny_inventory(), 50, 100, 11, 4);
  CHECK(b4.batch_values == b.batch_values);
}

TEST_CASE("SAA lower bound sanity over seeds") {
  std::vector<TwoStageProblem> ps;
  ps.push_back(tiny_inventory());
  ps.push_back(gen_inventory_random(2, 8, 4));
  RandomInstanceParams rp;
  rp.n = 3;
  rp.scenarios = 8;
  rp.seed = 2;
  ps.push_back(gen_random(rp));
  for (const auto& p : ps) {
    const double fs = f_star_of(p);
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const auto b = saa_lower_bound(p, 10, 20, seed);
      if (b.mean <= fs + 3.0 * *b.half_width + 1e-12) ++ok;
    }
    CHECK(ok >= 38);
  }
}

TEST_CASE("candidate evaluation") {
  const auto p = tiny_inventory();
  const std::vector<Vector> one = {Vector{1.0}};
  CHECK(evaluate_candidates(p, one, 50, 9).best_value == doctest::Approx(-0.9));

  const std::vector<Vector> two = {Vector{0.0}, Vector{1.0}};
  const auto e = evaluate_candidates(p, two, full_scenario_set(p.distribution));
  CHECK(e.best_index == 1);
  CHECK(e.best_value == doctest::Approx(-0.9));
  CHECK(e.best_iterate[0] == 1.0);

  const std::vector<Vector> tie = {Vector{1.0}, Vector{1.0}};
  CHECK(evaluate_candidates(p, tie, 10, 2).best_index == 0);

  CHECK(code_of([&] { evaluate_candidates(p, std::span<const Vector>{}, 10, 1); }) == ErrorCode::BadInput);
  const std::vector<Vector> bad = {Vector{1.0, 2.0}};
  CHECK(code_of([&] { evaluate_candidates(p, bad, 10, 1); }) == ErrorCode::BadInput);
}

TEST_CASE("candidate evaluation is monotone in the candidate list") {
  const auto p = gen_inventory_random(3, 30, 8);
  CounterRng rng(5, 0);
  const SampleSet s = draw_sample_set(p.distribution, 200, 17, kEvaluationStream);
  std::vector<Vector> cands;
  double prev = kInf;
  for (int i = 0; i < 20; ++i) {
    Vector x(p.n());
    for (std::size_t j = 0; j < p.n(); ++j) x[j] = rng.uniform(p.x_lower[j], std::min(p.x_upper[j], 3.0));
    cands.push_back(x);
    const auto e = evaluate_candidates(p, cands, s, 1 + i % 3);
    CHECK(e.best_value <= prev);
    prev = e.best_value;
  }
}

TEST_CASE("sample plan") {
  const auto p = sample_plan(0.05, 0.1, 0.5, 0.9, 0.1);
  CHECK(p.log_term == 17.0);
  CHECK(p.tau == doctest::Approx(3.904024868).epsilon(1e-9));
  CHECK(p.eps_tilde == doctest::Approx(1.0672746222e-3).epsilon(1e-9));
  CHECK(p.sample_size == 8780);
  CHECK_FALSE(p.inner_steps);

  const auto clamp = sample_plan(0.05, 0.5, 0.5, 0.4, 0.1);
  CHECK(clamp.tau == doctest::Approx(std::sqrt(2.0 * std::log(20.0))));
  CHECK(sample_plan(0.05, 0.1, 0.5, 0.9, 0.0).sample_size == 1);

  CHECK(code_of([] { sample_plan(0.0, 0.1, 0.5, 0.9, 0.1); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { sample_plan(0.05, 1.0, 0.5, 0.9, 0.1); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { sample_plan(0.05, 0.1, 0.5, 0.0, 0.1); }) == ErrorCode::BadParameter);
  CHECK(code_of([] { sample_plan(0.05, 0.1, 0.5, 0.9, -1.0); }) == ErrorCode::BadParameter);
}

TEST_CASE("sample plan matches an independent evaluation") {
  CounterRng rng(77, 0);
  for (int i = 0; i < 100; ++i) {
    const double zeta = rng.uniform(0.01, 0.5), ds = rng.uniform(0.01, 0.9), beta = rng.uniform(0.05, 0.95);
    const double gap0 = rng.uniform(0.05, 100.0), sigma = rng.uniform(0.0, 5.0);
    const double G = rng.uniform(0.1, 10.0), D = rng.uniform(0.1, 10.0);
    // skip tuples where the log term sits on an integer boundary
    const double raw = std::log(ds / gap0) / std::log(1.0 - beta / 4.0);
    if (std::abs(raw - std::round(raw)) < 1e-9) continue;
    const auto p = sample_plan(zeta, ds, beta, gap0, sigma, G, D);
    const auto r = plan_ref(zeta, ds, beta, gap0, sigma, G, D);
    CHECK(p.tau == doctest::Approx(r.tau).epsilon(1e-12));
    CHECK(p.eps_tilde == doctest::Approx(r.eps).epsilon(1e-12));
    const double sz = static_cast<double>(p.sample_size);
    CHECK(std::abs(sz - r.size) <= std::max(1.0, 1e-9 * r.size));
    CHECK(*p.inner_steps == doctest::Approx(r.inner).epsilon(1e-10));
    CHECK(*p.total_samples == doctest::Approx(r.samples).epsilon(1e-10));
  }
}

TEST_CASE("bound report document") {
  const auto j = nlohmann::json::parse(bound_report(summarize({1.0, 3.0}, 7, 9)));
  CHECK(j["mean"] == 2.0);
  CHECK(j["batches"] == 2);
  CHECK(j["batch_size"] == 7);
  CHECK(j["seed"] == 9);
  CHECK(nlohmann::json::parse(bound_report(summarize({1.0})))["half_width_95"].is_null());
}
