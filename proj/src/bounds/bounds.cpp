#include "tslp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "tslp/error.hpp"
#include "tslp/lp.hpp"

namespace tslp {

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(count, b + chunk);
      pool.emplace_back([&, w, b, e] {
        try {
          for (std::size_t i = b; i < e; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

BoundEstimate summarize(std::vector<double> values, std::size_t batch_size, std::uint64_t seed) {
  if (values.empty()) throw Error(ErrorCode::BadInput, "no values to summarize");
  BoundEstimate b;
  b.batch_size = batch_size;
  b.seed = seed;
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  b.mean = sum / m;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - b.mean) * (v - b.mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    const boost::math::students_t dist(m - 1.0);
    b.half_width = boost::math::quantile(dist, 0.975) * sd / std::sqrt(m);
  }
  b.batch_values = std::move(values);
  return b;
}

BoundEstimate saa_lower_bound(const TwoStageProblem& problem, std::size_t batches, std::size_t batch_size,
                              std::uint64_t seed, std::size_t threads) {
  if (batches == 0 || batch_size == 0) throw Error(ErrorCode::BadParameter, "batches and batch size must be positive");
  std::vector<double> values(batches, 0.0);
  parallel_for(batches, threads, [&](std::size_t b) {
    const SampleSet s = draw_sample_set(problem.distribution, batch_size, seed, kLowerBoundStream + b);
    const LpSolution sol = solve_lp(build_extensive_form(problem, s.scenarios));
    if (sol.status != LpStatus::Optimal)
      throw Error(sol.status == LpStatus::Infeasible ? ErrorCode::SecondStageInfeasible : ErrorCode::SecondStageUnbounded,
                  "sampled extensive form of batch " + std::to_string(b) + " has no optimum");
    values[b] = sol.objective;
  });
  return summarize(std::move(values), batch_size, seed);
}

CandidateEvaluation evaluate_candidates(const TwoStageProblem& problem, std::span<const Vector> iterates,
                                        const SampleSet& sample, std::size_t threads) {
  if (iterates.empty()) throw Error(ErrorCode::BadInput, "no candidate iterates to evaluate");
  for (const auto& x : iterates)
    if (x.size() != problem.n()) throw Error(ErrorCode::BadInput, "candidate has the wrong dimension");
  CandidateEvaluation out;
  out.values.assign(iterates.size(), 0.0);
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, iterates.size()));
  std::vector<Oracle> oracles;
  oracles.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) oracles.emplace_back(problem);
  const std::size_t chunk = (iterates.size() + workers - 1) / workers;
  parallel_for(iterates.size(), workers, [&](std::size_t i) {
    out.values[i] = oracles[i / chunk].estimate(sample, iterates[i]).value;
  });
  out.best_index = 0;
  for (std::size_t i = 1; i < out.values.size(); ++i)
    if (out.values[i] < out.values[out.best_index]) out.best_index = i;
  out.best_value = out.values[out.best_index];
  out.best_iterate = iterates[out.best_index];
  return out;
}

CandidateEvaluation evaluate_candidates(const TwoStageProblem& problem, std::span<const Vector> iterates,
                                        std::size_t eval_size, std::uint64_t seed, std::size_t threads) {
  if (eval_size == 0) throw Error(ErrorCode::BadParameter, "evaluation sample size must be positive");
  if (iterates.empty()) throw Error(ErrorCode::BadInput, "no candidate iterates to evaluate");
  const SampleSet s = draw_sample_set(problem.distribution, eval_size, seed, kEvaluationStream);
  return evaluate_candidates(problem, iterates, s, threads);
}

SamplePlan sample_plan(double zeta, double delta_s, double beta, double gap0, double sigma,
                       std::optional<double> G, std::optional<double> D) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw Error(ErrorCode::BadParameter, "zeta must lie in (0, 1)");
  if (!(delta_s > 0.0 && delta_s < 1.0)) throw Error(ErrorCode::BadParameter, "delta_S must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::BadParameter, "beta must lie in (0, 1)");
  if (!(gap0 > 0.0)) throw Error(ErrorCode::BadParameter, "initial gap must be positive");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::BadParameter, "sigma must be nonnegative");

  SamplePlan p;
  p.zeta = zeta;
  p.delta_s = delta_s;
  p.beta = beta;
  p.gap0 = gap0;
  p.sigma = sigma;
  p.log_term = std::ceil(std::log(delta_s / gap0) / std::log(1.0 - beta / 4.0));
  const double count = std::max(1.0, 6.0 * p.log_term);
  p.tau = std::max(1.0, std::sqrt(2.0 * std::log(count / zeta)));
  p.eps_tilde = beta * delta_s / (8.0 * (beta + 1.0) * p.tau);
  p.sample_size = static_cast<std::size_t>(std::ceil(std::max(1.0, sigma * sigma / (p.eps_tilde * p.eps_tilde))));
  if (G && D) {
    const double g2d2 = *G * *G * *D * *D;
    const double base = 3.0 * (1.0 - beta) * (1.0 - beta) * (2.0 - beta / 4.0);
    const double b1 = beta + 1.0;
    p.inner_steps = 256.0 * g2d2 * b1 * b1 / (base * beta * beta * delta_s * delta_s);
    const double samples = 16384.0 * sigma * sigma * g2d2 * std::pow(b1, 4) * p.tau * p.tau /
                           (base * std::pow(beta, 4) * std::pow(delta_s, 4));
    p.total_samples = std::max(*p.inner_steps, samples);
  }
  return p;
}

std::string bound_report(const BoundEstimate& b) {
  nlohmann::ordered_json j;
  j["mean"] = b.mean;
  if (b.half_width)
    j["half_width_95"] = *b.half_width;
  else
    j["half_width_95"] = nullptr;
  j["batches"] = b.batch_values.size();
  j["batch_size"] = b.batch_size;
  j["seed"] = b.seed;
  j["batch_values"] = b.batch_values;
  return j.dump(2) + "\n";
}

}  // namespace tslp
