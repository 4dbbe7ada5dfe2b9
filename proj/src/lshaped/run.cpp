#include <chrono>
#include <cmath>
#include <deque>
#include <ostream>
#include <string>

#include <json.hpp>

#include "tslp/error.hpp"
#include "tslp/format.hpp"
#include "tslp/lshaped.hpp"

namespace tslp {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::StopTolerance: return "stop_tolerance";
    case StopReason::PolicyTerminate: return "policy_terminate";
    case StopReason::OuterBudget: return "outer_budget";
    case StopReason::InnerBudget: return "inner_budget";
    case StopReason::InnerLoopBound: return "inner_loop_bound";
    case StopReason::WallClock: return "wall_clock";
  }
  return "unknown";
}

bool is_budget_stop(StopReason reason) {
  return reason != StopReason::StopTolerance && reason != StopReason::PolicyTerminate;
}

void check_config(const SolverConfig& c) {
  if (!(c.beta > 0.0 && c.beta < 1.0)) throw Error(ErrorCode::BadParameter, "beta must lie in (0, 1)");
  if (c.sample_size == 0 && !c.exact_oracle) throw Error(ErrorCode::BadParameter, "sample size must be positive");
  if (c.memory == 0) throw Error(ErrorCode::BadParameter, "bundle memory must be positive");
  if (c.max_outer == 0 || c.max_total_inner == 0)
    throw Error(ErrorCode::BadParameter, "outer and inner budgets must be positive");
  if (!(c.max_wall_seconds >= 0.0)) throw Error(ErrorCode::BadParameter, "wall-time budget must be nonnegative");
  if (!(c.stop_tol >= 0.0)) throw Error(ErrorCode::BadParameter, "stop tolerance must be nonnegative");
  if (c.G && !(*c.G > 0.0)) throw Error(ErrorCode::BadParameter, "G must be positive");
  if ((c.eps1 && !(*c.eps1 >= 0.0)) || (c.eps2 && !(*c.eps2 >= 0.0)))
    throw Error(ErrorCode::BadParameter, "noise bounds must be nonnegative");
  check_policy(c.policy);
}

RunResult run(const TwoStageProblem& problem, const SolverConfig& config) {
  check_config(config);
  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  };

  const ValidationReport report = validate(problem);
  const FirstStageRegion region = FirstStageRegion::of(problem);
  StepSizePolicy policy = config.policy;
  if (auto* opt = std::get_if<OptimalPolicy>(&policy); opt && !opt->diameter) opt->diameter = report.diameter;

  Vector center = report.feasible_point;
  if (config.x0) {
    if (config.x0->size() != problem.n() || !region.contains(*config.x0))
      throw Error(ErrorCode::BadParameter, "starting point x0 is not in X");
    center = *config.x0;
  }

  Oracle oracle(problem, config.threads);
  SampleSet full;
  if (config.exact_oracle) full = full_scenario_set(problem.distribution);

  RunResult res;
  res.diameter = report.diameter;
  res.best_value = kInf;
  std::deque<Vector> recent;
  std::optional<double> last_model;
  std::size_t cum = 0;
  bool done = false;

  auto consider = [&](const Vector& x, double value, std::size_t k) {
    if (value < res.best_value) {
      res.best_value = value;
      res.best_center = x;
      res.best_k = k;
    }
  };
  auto stop = [&](StopReason r) {
    res.reason = r;
    done = true;
  };

  for (std::size_t k = 0; !done; ++k) {
    if (k >= config.max_outer) {
      stop(StopReason::OuterBudget);
      break;
    }
    const std::string ctx_k = "k=" + std::to_string(k);
    SampleSet drawn;
    if (!config.exact_oracle) drawn = draw_sample_set(problem.distribution, config.sample_size, config.seed, k);
    const SampleSet& sample = config.exact_oracle ? full : drawn;

    Estimate at_center;
    try {
      at_center = oracle.estimate(sample, center);
    } catch (const Error& e) {
      throw e.with_context(ctx_k + ", t=0");
    }
    const double fc = at_center.value;
    consider(center, fc, k);
    const std::optional<double> rho_k = next_step_size(policy, config.beta, k, fc, last_model);

    OuterRecord outer;
    outer.k = k;
    outer.seed = config.seed;
    outer.center = center;
    outer.fhat_center = fc;
    outer.grad_norm = norm2(at_center.subgradient);
    res.outer_iterations = k + 1;
    if (!rho_k) {
      res.trace.outer.push_back(std::move(outer));
      stop(StopReason::PolicyTerminate);
      break;
    }
    const double rho = *rho_k;
    outer.rho = rho;

    double inner_cap = kInf;
    if (config.G && config.eps1 && config.eps2) {
      const double eps_bar = (config.beta + 1.0) * (*config.eps1 + *config.eps2);
      if (eps_bar > 0.0) inner_cap = inner_loop_bound(*config.G, rho, config.beta, eps_bar);
    }

    BundleModel model(center, at_center, config.memory, k);
    std::optional<ProxWarmStart> warm;
    for (std::size_t t = 0;; ++t) {
      if (cum >= config.max_total_inner) {
        stop(StopReason::InnerBudget);
        break;
      }
      if (config.max_wall_seconds > 0.0 && elapsed_ms() > 1000.0 * config.max_wall_seconds) {
        stop(StopReason::WallClock);
        break;
      }
      if (static_cast<double>(t) >= inner_cap) {
        stop(StopReason::InnerLoopBound);
        break;
      }
      const std::string ctx = ctx_k + ", t=" + std::to_string(t);
      ProxResult prox;
      Estimate at_trial;
      try {
        prox = solve_prox_step(model, center, rho, region, {}, warm ? &*warm : nullptr);
        at_trial = oracle.estimate(sample, prox.x);
      } catch (const Error& e) {
        throw e.with_context(ctx);
      }
      const StepKind kind = serious_test(fc, at_trial.value, prox.model_value, config.beta);
      ++cum;

      InnerRecord rec;
      rec.k = k;
      rec.t = t;
      rec.kind = kind;
      rec.rho = rho;
      rec.fhat_center = fc;
      rec.fhat_trial = at_trial.value;
      rec.model_trial = prox.model_value;
      rec.delta_tilde = prox.delta_tilde;
      rec.step_norm = distance(prox.x, center);
      rec.cum_inner = cum;
      rec.wall_ms = config.record_wall_time ? elapsed_ms() : 0.0;
      res.trace.inner.push_back(rec);

      recent.push_back(prox.x);
      if (recent.size() > config.keep_last) recent.pop_front();

      if (kind == StepKind::Serious) {
        outer.inner_steps = t + 1;
        outer.completed = true;
        last_model = prox.model_value;
        center = prox.x;
        consider(center, at_trial.value, k);
        if (prox.delta_tilde <= config.stop_tol) stop(StopReason::StopTolerance);
        break;
      }
      model.add_cuts(prox.x, at_trial, prox.model_value, rho, t);
      warm = prox.warm;
    }
    if (!outer.completed) {
      std::size_t steps = 0;
      for (auto it = res.trace.inner.rbegin(); it != res.trace.inner.rend() && it->k == k; ++it) ++steps;
      outer.inner_steps = steps;
    }
    res.trace.outer.push_back(std::move(outer));
  }

  res.total_inner = cum;
  res.empirical_G = oracle.max_subgradient_norm();
  res.last_iterates.assign(recent.begin(), recent.end());
  return res;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "k,t,kind,rho,fhat_center,fhat_trial,model_trial,delta_tilde,step_norm,cum_inner,wall_ms\n";
  for (const auto& r : trace.inner) {
    out << r.k << ',' << r.t << ',' << (r.kind == StepKind::Serious ? "serious" : "null") << ','
        << format_double(r.rho) << ',' << format_double(r.fhat_center) << ',' << format_double(r.fhat_trial) << ','
        << format_double(r.model_trial) << ',' << format_double(r.delta_tilde) << ','
        << format_double(r.step_norm) << ',' << r.cum_inner << ',' << format_double(r.wall_ms) << '\n';
  }
}

namespace {

nlohmann::ordered_json policy_json(const StepSizePolicy& policy) {
  nlohmann::ordered_json j;
  j["name"] = policy_name(policy);
  if (const auto* p = std::get_if<ConstantPolicy>(&policy)) j["rho"] = p->rho;
  if (const auto* p = std::get_if<OptimalPolicy>(&policy)) {
    j["f_star"] = p->f_star;
    if (p->diameter) j["diameter"] = *p->diameter;
    j["eps2"] = p->eps2;
  }
  if (const auto* p = std::get_if<PracticalPolicy>(&policy)) j["cp"] = p->cp;
  if (const auto* p = std::get_if<SharpConstantPolicy>(&policy)) {
    j["mu"] = p->mu;
    j["v"] = p->v;
    j["eps_bar"] = p->eps_bar;
  }
  if (const auto* p = std::get_if<SharpOptimalPolicy>(&policy)) {
    j["mu"] = p->mu;
    j["f_star"] = p->f_star;
    j["eps2"] = p->eps2;
  }
  return j;
}

}  // namespace

std::string summary_document(const RunResult& r, const SolverConfig& c) {
  nlohmann::ordered_json j;
  j["best_value"] = r.best_value;
  j["best_iterate"] = r.best_center;
  j["best_outer_index"] = r.best_k;
  j["stop_reason"] = to_string(r.reason);
  j["outer_iterations"] = r.outer_iterations;
  j["total_inner"] = r.total_inner;
  std::size_t serious = 0;
  for (const auto& rec : r.trace.inner) serious += rec.kind == StepKind::Serious ? 1 : 0;
  j["serious_steps"] = serious;
  j["null_steps"] = r.total_inner - serious;
  j["policy"] = policy_json(c.policy);
  j["beta"] = c.beta;
  j["sample_size"] = c.exact_oracle ? nlohmann::ordered_json("exact") : nlohmann::ordered_json(c.sample_size);
  j["memory"] = c.memory;
  j["seed"] = c.seed;
  j["empirical_G"] = r.empirical_G;
  j["diameter"] = r.diameter;
  j["diameter_note"] = "over-estimate from variable bounds";
  j["last_iterates"] = r.last_iterates;
  return j.dump(2) + "\n";
}

}  // namespace tslp
