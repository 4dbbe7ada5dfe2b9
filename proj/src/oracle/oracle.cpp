#include "tslp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "tslp/error.hpp"
#include "tslp/rng.hpp"

namespace tslp {

namespace {

std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto i = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(i, cumulative.size() - 1);
}

std::vector<double> cumulate(const std::vector<double>& probs) {
  std::vector<double> cum(probs.size());
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cum[i] = s += probs[i];
  return cum;
}

}  // namespace

SampleSet draw_sample_set(const ScenarioDistribution& dist, std::size_t size, std::uint64_t seed,
                          std::size_t k) {
  if (size == 0) throw Error(ErrorCode::BadParameter, "sample size must be at least 1");
  SampleSet out;
  out.seed = seed;
  out.k = k;
  out.scenarios.reserve(size);
  CounterRng rng(seed, k);
  const double w = 1.0 / static_cast<double>(size);

  if (const auto* fl = std::get_if<FiniteList>(&dist)) {
    std::vector<double> probs;
    for (const auto& s : fl->scenarios) probs.push_back(s.weight);
    const auto cum = cumulate(probs);
    for (std::size_t i = 0; i < size; ++i) {
      Scenario s = fl->scenarios[pick(cum, rng.uniform())];
      s.weight = w;
      out.scenarios.push_back(std::move(s));
    }
  } else if (const auto* ind = std::get_if<IndependentDiscrete>(&dist)) {
    std::vector<std::vector<double>> cums;
    for (const auto& m : ind->marginals) cums.push_back(cumulate(m.probabilities));
    for (std::size_t i = 0; i < size; ++i) {
      Scenario s;
      s.weight = w;
      for (std::size_t j = 0; j < ind->marginals.size(); ++j) {
        const auto& m = ind->marginals[j];
        s.overrides.push_back({m.at, m.values[pick(cums[j], rng.uniform())]});
      }
      out.scenarios.push_back(std::move(s));
    }
  } else {
    const auto& blk = std::get<BlockDiscrete>(dist);
    std::vector<std::vector<double>> cums;
    for (const auto& b : blk.blocks) {
      std::vector<double> probs;
      for (const auto& r : b.realizations) probs.push_back(r.probability);
      cums.push_back(cumulate(probs));
    }
    for (std::size_t i = 0; i < size; ++i) {
      Scenario s;
      s.weight = w;
      for (std::size_t j = 0; j < blk.blocks.size(); ++j) {
        const auto& r = blk.blocks[j].realizations[pick(cums[j], rng.uniform())];
        s.overrides.insert(s.overrides.end(), r.overrides.begin(), r.overrides.end());
      }
      out.scenarios.push_back(std::move(s));
    }
  }
  return out;
}

SampleSet full_scenario_set(const ScenarioDistribution& dist, double cap) {
  SampleSet out;
  out.scenarios = enumerate_scenarios(dist, cap);
  out.exhaustive = true;
  return out;
}

Oracle::Oracle(const TwoStageProblem& problem, std::size_t threads, ToleranceSet tol)
    : problem_(&problem) {
  threads = std::max<std::size_t>(1, threads);
  solvers_.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) solvers_.emplace_back(problem, tol);
}

Estimate Oracle::estimate(const SampleSet& sample, std::span<const double> x) {
  const TwoStageProblem& p = *problem_;
  const std::size_t n = p.n(), count = sample.size();
  if (count == 0) throw Error(ErrorCode::BadInput, "empty sample set");
  values_.assign(count, 0.0);
  grads_.assign(count * n, 0.0);

  auto work = [&](std::size_t worker, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SecondStageResult r;
      try {
        r = solvers_[worker].solve(sample.scenarios[i], x);
      } catch (const Error& e) {
        throw e.with_context("scenario " + std::to_string(i) + " of sample k=" + std::to_string(sample.k));
      }
      values_[i] = r.value;
      std::copy(r.subgradient.begin(), r.subgradient.end(), grads_.begin() + static_cast<std::ptrdiff_t>(i * n));
    }
  };

  const std::size_t workers = std::min(solvers_.size(), count);
  if (workers <= 1) {
    work(0, 0, count);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (count + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk, e = std::min(count, b + chunk);
        pool.emplace_back([&, w, b, e] {
          try {
            work(w, b, e);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Estimate est;
  est.value = dot(p.c, x);
  est.subgradient = p.c;
  for (std::size_t i = 0; i < count; ++i) {
    const double w = sample.scenarios[i].weight;
    est.value += w * values_[i];
    for (std::size_t j = 0; j < n; ++j) est.subgradient[j] += w * grads_[i * n + j];
  }
  est.scenario_values = values_;
  max_norm_ = std::max(max_norm_, norm2(est.subgradient));
  ++evaluations_;
  return est;
}

Estimate estimate(const TwoStageProblem& problem, const SampleSet& sample, std::span<const double> x) {
  Oracle oracle(problem);
  return oracle.estimate(sample, x);
}

NoiseBounds exhaustive_noise_bounds(const TwoStageProblem& problem, std::span<const SampleSet> samples,
                                    std::span<const Vector> points, double cap) {
  const SampleSet full = full_scenario_set(problem.distribution, cap);
  Oracle oracle(problem);
  NoiseBounds nb;
  for (const auto& x : points) {
    const double f = oracle.estimate(full, x).value;
    for (const auto& s : samples) {
      const double fh = oracle.estimate(s, x).value;
      nb.eps1 = std::max(nb.eps1, f - fh);
      nb.eps2 = std::max(nb.eps2, fh - f);
    }
  }
  return nb;
}

NoiseBounds exhaustive_noise_bounds(const TwoStageProblem& problem, std::size_t sample_size,
                                    std::span<const Vector> points, std::size_t resamples,
                                    std::uint64_t seed, double cap) {
  // Checked first so an oversized distribution fails before any sampling.
  if (joint_scenario_count(problem.distribution) > cap)
    throw Error(ErrorCode::EnumerationCapExceeded, "distribution too large for exhaustive noise bounds");
  std::vector<SampleSet> sets;
  for (std::size_t r = 0; r < resamples; ++r)
    sets.push_back(draw_sample_set(problem.distribution, sample_size, seed, r));
  return exhaustive_noise_bounds(problem, sets, points, cap);
}

double exact_variance(const TwoStageProblem& problem, std::span<const double> x, double cap) {
  const SampleSet full = full_scenario_set(problem.distribution, cap);
  const Estimate est = estimate(problem, full, x);
  const double cx = dot(problem.c, x);
  double var = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double d = cx + est.scenario_values[i] - est.value;
    var += full.scenarios[i].weight * d * d;
  }
  return var;
}

}  // namespace tslp
