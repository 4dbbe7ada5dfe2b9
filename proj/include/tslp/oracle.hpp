#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tslp/instance.hpp"
#include "tslp/lp.hpp"

namespace tslp {

struct SampleSet {
  std::vector<Scenario> scenarios;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  /// True when the set is the full enumerated distribution (probability
  /// weights) rather than a Monte Carlo draw.
  bool exhaustive = false;

  std::size_t size() const { return scenarios.size(); }
};

/// i.i.d. draws with replacement, weights 1/size. The RNG stream is keyed by
/// (seed, k) so a set can be regenerated bit-exactly.
SampleSet draw_sample_set(const ScenarioDistribution& dist, std::size_t size, std::uint64_t seed,
                          std::size_t k);

/// Every joint scenario with its probability as weight.
SampleSet full_scenario_set(const ScenarioDistribution& dist, double cap = kDefaultEnumerationCap);

struct Estimate {
  double value = 0.0;       // f_hat(x)
  Vector subgradient;       // g_hat(x)
  Vector scenario_values;   // Q(x; xi_i), in sample order
};

/// Evaluates f_hat and g_hat over a sample set. Second-stage solves are spread
/// over `threads` workers; the reduction always runs in sample order, so the
/// result does not depend on the thread count.
class Oracle {
 public:
  explicit Oracle(const TwoStageProblem& problem, std::size_t threads = 1, ToleranceSet tol = {});

  Estimate estimate(const SampleSet& sample, std::span<const double> x);

  /// Largest ||g_hat|| seen so far (an empirical stand-in for G).
  double max_subgradient_norm() const { return max_norm_; }
  std::size_t evaluations() const { return evaluations_; }
  const TwoStageProblem& problem() const { return *problem_; }

 private:
  const TwoStageProblem* problem_;
  std::vector<SecondStageSolver> solvers_;
  std::vector<double> values_;
  std::vector<double> grads_;  // size x n, row per scenario
  double max_norm_ = 0.0;
  std::size_t evaluations_ = 0;
};

Estimate estimate(const TwoStageProblem& problem, const SampleSet& sample, std::span<const double> x);

/// Oracle noise levels. eps_bar is always recomputed from eps1 and eps2.
struct NoiseModel {
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> sigma;

  bool known() const { return eps1.has_value() && eps2.has_value(); }
  double eps_bar(double beta) const { return (beta + 1.0) * (eps1.value_or(0.0) + eps2.value_or(0.0)); }
};

struct NoiseBounds {
  double eps1 = 0.0;  // max f(x) - f_hat(x)
  double eps2 = 0.0;  // max f_hat(x) - f(x)
};

/// Empirical (eps1, eps2) over the given points and sample sets, compared with
/// f computed on the full distribution. An estimate, not a certificate.
NoiseBounds exhaustive_noise_bounds(const TwoStageProblem& problem, std::span<const SampleSet> samples,
                                    std::span<const Vector> points, double cap = kDefaultEnumerationCap);

/// Same, drawing `resamples` sets of `sample_size` with streams 0..resamples-1.
NoiseBounds exhaustive_noise_bounds(const TwoStageProblem& problem, std::size_t sample_size,
                                    std::span<const Vector> points, std::size_t resamples,
                                    std::uint64_t seed, double cap = kDefaultEnumerationCap);

/// Variance of c'x + Q(x; xi) under the full distribution.
double exact_variance(const TwoStageProblem& problem, std::span<const double> x,
                      double cap = kDefaultEnumerationCap);

}  // namespace tslp
