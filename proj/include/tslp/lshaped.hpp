#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tslp/instance.hpp"
#include "tslp/master_qp.hpp"
#include "tslp/oracle.hpp"

namespace tslp {

// ---------------------------------------------------------------------------
// Step sizes

struct ConstantPolicy {
  double rho = 1.0;
};
/// rho_k = (f_hat_k(x_k0) - eps2 - f*) / D^2; D defaults to the validated
/// diameter when left empty.
struct OptimalPolicy {
  double f_star = 0.0;
  std::optional<double> diameter;
  double eps2 = 0.0;
};
struct PracticalPolicy {
  double cp = 1.0;
};
/// rho = beta mu^2 v / (2 eps_bar).
struct SharpConstantPolicy {
  double mu = 1.0;
  double v = 0.5;
  double eps_bar = 1.0;
};
/// rho_k = mu^2 / (f_hat_k(x_k0) - eps2 - f*).
struct SharpOptimalPolicy {
  double mu = 1.0;
  double f_star = 0.0;
  double eps2 = 0.0;
};

using StepSizePolicy =
    std::variant<ConstantPolicy, OptimalPolicy, PracticalPolicy, SharpConstantPolicy, SharpOptimalPolicy>;

std::string policy_name(const StepSizePolicy& policy);

/// Throws BadParameter when the policy parameters are out of range.
void check_policy(const StepSizePolicy& policy);

/// Step size for outer iteration k, or nullopt when the policy asks to stop.
/// The optimal and sharp-optimal policies stop once f_hat - eps2 - f* is at
/// most 1e-12 (1 + |f*|).
/// `last_model` is f_{k-1,T_{k-1}-1}(x_{k,0}), the previous model's value at
/// the new center (needed by the practical policy for k > 0). Throws
/// MissingParameter when the optimal policy has no diameter.
std::optional<double> next_step_size(const StepSizePolicy& policy, double beta, std::size_t k,
                                     double fhat_center, std::optional<double> last_model);

enum class StepKind { Serious, Null };

/// Serious iff beta (f_center - model_trial) <= f_center - f_trial.
StepKind serious_test(double fhat_center, double fhat_trial, double model_trial, double beta);

// ---------------------------------------------------------------------------
// Solver

struct SolverConfig {
  double beta = 0.5;
  std::size_t sample_size = 100;
  /// Use the full scenario set with probability weights at every outer step.
  bool exact_oracle = false;
  StepSizePolicy policy = ConstantPolicy{1.0};
  std::size_t memory = kDefaultMemory;

  std::size_t max_outer = 1000;
  std::size_t max_total_inner = 10000;
  double max_wall_seconds = 0.0;  // 0: unlimited
  double stop_tol = 1e-8;         // stop when delta_tilde <= stop_tol at a serious step

  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::optional<Vector> x0;

  /// When G and both eps are known, each inner loop is capped at the
  /// constant-step inner bound; otherwise only max_total_inner applies.
  std::optional<double> G;
  std::optional<double> eps1;
  std::optional<double> eps2;

  bool record_wall_time = false;
  std::size_t keep_last = 50;
};

/// Throws BadParameter.
void check_config(const SolverConfig& config);

struct InnerRecord {
  std::size_t k = 0;
  std::size_t t = 0;
  StepKind kind = StepKind::Null;
  double rho = 0.0;
  double fhat_center = 0.0;
  double fhat_trial = 0.0;
  double model_trial = 0.0;
  double delta_tilde = 0.0;
  double step_norm = 0.0;
  std::size_t cum_inner = 0;
  double wall_ms = 0.0;
};

struct OuterRecord {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double rho = 0.0;
  Vector center;
  double fhat_center = 0.0;
  double grad_norm = 0.0;  // ||g_hat_k(x_k0)||
  std::size_t inner_steps = 0;  // T_k once completed
  bool completed = false;
};

struct RunTrace {
  std::vector<InnerRecord> inner;
  std::vector<OuterRecord> outer;
};

enum class StopReason { StopTolerance, PolicyTerminate, OuterBudget, InnerBudget, InnerLoopBound, WallClock };

std::string to_string(StopReason reason);

/// True for reasons that mean a budget ran out rather than a clean stop.
bool is_budget_stop(StopReason reason);

struct RunResult {
  Vector best_center;
  double best_value = 0.0;  // f_hat of best_center under the sample it was evaluated on
  std::size_t best_k = 0;
  RunTrace trace;
  std::vector<Vector> last_iterates;  // up to keep_last most recent trial points, oldest first
  StopReason reason = StopReason::OuterBudget;
  double empirical_G = 0.0;
  double diameter = 0.0;
  std::size_t total_inner = 0;
  std::size_t outer_iterations = 0;
};

/// Two-loop inexact regularized L-shaped method. Errors from the oracle or
/// the prox step are rethrown with "k=..., t=..." context.
RunResult run(const TwoStageProblem& problem, const SolverConfig& config);

void write_trace_csv(std::ostream& out, const RunTrace& trace);

/// JSON summary: best value and iterate, counts, stop reason, policy.
std::string summary_document(const RunResult& result, const SolverConfig& config);

// ---------------------------------------------------------------------------
// Diagnostics

struct ProximalGap {
  /// f(xc) - (f(x_hat) + rho/2 ||x_hat - xc||^2), using the true f at x_hat.
  double delta = 0.0;
  /// f(xc) - (model prox objective); delta <= true gap <= delta_upper.
  double delta_upper = 0.0;
  Vector x_prox;
  std::size_t iterations = 0;
};

/// Exact proximal gap at a center: the prox problem on the full-scenario f
/// solved by a full-memory cutting-plane loop until f - model <= tol at the
/// prox point. Throws EnumerationCapExceeded.
ProximalGap exact_proximal_gap(const TwoStageProblem& problem, std::span<const double> center, double rho,
                               double tol = 1e-10, double cap = kDefaultEnumerationCap);

/// Per-outer inner-loop bound ceil(8G^2/(rho (1-beta)^2 gap) - 16/(1-beta)^2) + 1,
/// where gap is Delta_k (exact oracle) or eps_bar. Infinite for gap <= 0.
double inner_loop_bound(double G, double rho, double beta, double gap);

/// Lower bound on Delta_k from the optimality gap and the diameter.
double proximal_gap_lower_bound(double gap, double rho, double D);

/// Sharp version: mu^2/(2 rho) when gap >= mu^2/rho, nullopt otherwise.
std::optional<double> sharp_gap_lower_bound(double gap, double rho, double mu);

enum class BoundFamily { Constant, Optimal, SharpConstant, SharpOptimal };

struct TheoryInputs {
  double beta = 0.5;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::optional<double> G;
  std::optional<double> D;
  std::optional<double> rho;  // Constant family
  std::optional<double> f0;   // f(x_00)
  std::optional<double> f_star;
  std::optional<double> mu;
  std::optional<double> v;
};

/// Closed-form guarantees. Fields that need a missing optional input are
/// left empty; `exact_oracle` is set when eps_bar = 0, in which case the
/// outer counts are not finite and stay empty too.
struct TheoryBounds {
  BoundFamily family = BoundFamily::Constant;
  double eps_bar = 0.0;
  bool exact_oracle = false;
  double delta = 0.0;                    // delta^C, delta^I, delta^SC or delta^SI
  std::optional<double> outer;           // K
  std::optional<double> inner_per_outer; // constant family only
  std::optional<double> total_inner;
};

/// Throws MissingParameter when a required input of the family is absent
/// (rho and D for Constant; f0 and f* for all; mu and v for SharpConstant).
TheoryBounds theory_bounds(const TheoryInputs& in, BoundFamily family);

struct TraceViolation {
  std::size_t k = 0;
  std::size_t t = 0;
  std::string what;
};

/// Checks the serious-decrease, null-step and monotone delta_tilde
/// inequalities plus delta_tilde_0 <= G^2/(2 rho) on a trace.
std::vector<TraceViolation> check_trace(const RunTrace& trace, double beta, double G, double tol = 1e-9);

}  // namespace tslp
