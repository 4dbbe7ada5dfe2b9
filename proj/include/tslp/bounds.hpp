#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tslp/instance.hpp"
#include "tslp/oracle.hpp"

namespace tslp {

struct BoundEstimate {
  std::vector<double> batch_values;
  double mean = 0.0;
  /// 95% Student-t half-width; empty with a single batch.
  std::optional<double> half_width;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

/// Mean and t-based 95% half-width of a list of values (half-width needs
/// at least two values).
BoundEstimate summarize(std::vector<double> values, std::size_t batch_size = 0, std::uint64_t seed = 0);

/// SAA lower bound: each batch draws `batch_size` scenarios and solves the
/// extensive form of the sampled problem. Batches run on up to `threads`
/// workers; values are kept in batch order. Throws TooLarge, BadParameter.
BoundEstimate saa_lower_bound(const TwoStageProblem& problem, std::size_t batches = 50,
                              std::size_t batch_size = 100, std::uint64_t seed = 1, std::size_t threads = 1);

struct CandidateEvaluation {
  double best_value = 0.0;
  std::size_t best_index = 0;
  Vector best_iterate;
  std::vector<double> values;  // f_hat of each candidate, in input order
};

/// Evaluates every candidate on the same sample (common random numbers) and
/// returns the minimum, lowest index on ties. Throws BadInput on an empty
/// list or a candidate of the wrong size.
CandidateEvaluation evaluate_candidates(const TwoStageProblem& problem, std::span<const Vector> iterates,
                                        const SampleSet& sample, std::size_t threads = 1);

/// Draws one fresh evaluation sample of `eval_size` scenarios from `seed`.
CandidateEvaluation evaluate_candidates(const TwoStageProblem& problem, std::span<const Vector> iterates,
                                        std::size_t eval_size = 1000, std::uint64_t seed = 1,
                                        std::size_t threads = 1);

/// Sample streams reserved for bounds so they never coincide with the
/// solver's per-outer-iteration streams k = 0, 1, ...
inline constexpr std::uint64_t kLowerBoundStream = 1ull << 40;
inline constexpr std::uint64_t kEvaluationStream = 1ull << 41;

struct SamplePlan {
  double zeta = 0.0;
  double delta_s = 0.0;
  double beta = 0.0;
  double gap0 = 0.0;
  double sigma = 0.0;
  double log_term = 0.0;  // ceil(log_{1-beta/4}(delta_s / gap0))
  double tau = 0.0;
  double eps_tilde = 0.0;
  std::size_t sample_size = 0;
  std::optional<double> inner_steps;    // needs G and D
  std::optional<double> total_samples;  // needs G and D
};

/// High-probability sample plan. Throws BadParameter unless zeta and
/// delta_s lie in (0, 1), gap0 > 0, sigma >= 0 and 0 < beta < 1.
SamplePlan sample_plan(double zeta, double delta_s, double beta, double gap0, double sigma,
                       std::optional<double> G = std::nullopt, std::optional<double> D = std::nullopt);

/// JSON report: mean, half-width, batch values, batch size, seed.
std::string bound_report(const BoundEstimate& b);

}  // namespace tslp
