#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tslp/vector_ops.hpp"

namespace tslp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, GreaterEqual, Equal };

/// Compressed sparse row. Column indices within a row are kept sorted.
struct SparseRow {
  std::vector<std::size_t> index;
  std::vector<double> value;

  double dot(std::span<const double> x) const;
  /// Value at `col`, zero when absent.
  double at(std::size_t col) const;
  /// Inserts or overwrites the coefficient at `col`.
  void set(std::size_t col, double v);
  std::size_t size() const { return index.size(); }
  bool operator==(const SparseRow&) const = default;
};

struct SparseMatrix {
  std::size_t cols = 0;
  std::vector<SparseRow> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t nonzeros() const;
  bool operator==(const SparseMatrix&) const = default;
};

struct LinearRow {
  std::string name;
  SparseRow coefficients;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
  bool operator==(const LinearRow&) const = default;
};

/// Which piece of the scenario-dependent data an override replaces.
enum class StochasticTarget { T, q, h };

/// Address of a single stochastic entry. `row` is unused for q, `col` for h.
struct EntryAddress {
  StochasticTarget target = StochasticTarget::h;
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const EntryAddress&) const = default;
};

struct Override {
  EntryAddress at;
  double value = 0.0;
  bool operator==(const Override&) const = default;
};

/// A realization: sparse overrides of the baseline (T, q, h) plus its weight
/// (a probability inside a distribution, 1/|S| inside a sample set).
struct Scenario {
  std::vector<Override> overrides;
  double weight = 1.0;
  bool operator==(const Scenario&) const = default;
};

struct FiniteList {
  std::vector<Scenario> scenarios;
  bool operator==(const FiniteList&) const = default;
};

struct DiscreteMarginal {
  EntryAddress at;
  std::vector<double> values;
  std::vector<double> probabilities;
  bool operator==(const DiscreteMarginal&) const = default;
};

/// Every marginal is drawn independently of the others.
struct IndependentDiscrete {
  std::vector<DiscreteMarginal> marginals;
  bool operator==(const IndependentDiscrete&) const = default;
};

struct BlockRealization {
  double probability = 0.0;
  std::vector<Override> overrides;
  bool operator==(const BlockRealization&) const = default;
};

struct DiscreteBlock {
  std::string name;
  std::vector<BlockRealization> realizations;
  bool operator==(const DiscreteBlock&) const = default;
};

/// Blocks are independent of each other; entries inside a block move jointly.
struct BlockDiscrete {
  std::vector<DiscreteBlock> blocks;
  bool operator==(const BlockDiscrete&) const = default;
};

using ScenarioDistribution = std::variant<FiniteList, IndependentDiscrete, BlockDiscrete>;

inline constexpr double kDefaultEnumerationCap = 1e6;

/// Number of joint scenarios; saturates at +inf on overflow.
double joint_scenario_count(const ScenarioDistribution& dist);

/// All joint scenarios with their probabilities, in a fixed lexicographic
/// order. Throws EnumerationCapExceeded when the count exceeds `cap`.
std::vector<Scenario> enumerate_scenarios(const ScenarioDistribution& dist,
                                          double cap = kDefaultEnumerationCap);

/// Two-stage stochastic LP with fixed recourse:
///
///   min  c'x + E[Q(x, xi)]   s.t.  first-stage rows,  x_lower <= x <= x_upper
///   Q(x, xi) = min q(xi)'y   s.t.  T(xi) x + W y  (sense)  h(xi),
///                                  y_lower <= y <= y_upper
///
/// Recourse bounds and row senses are deterministic; only T, q and h vary.
struct TwoStageProblem {
  std::string name;

  Vector c;
  std::vector<LinearRow> first_stage_rows;
  Vector x_lower;
  Vector x_upper;
  std::vector<std::string> x_names;

  SparseMatrix W;
  std::vector<RowSense> recourse_sense;
  Vector y_lower;
  Vector y_upper;
  std::vector<std::string> y_names;
  std::vector<std::string> recourse_row_names;

  SparseMatrix base_T;
  Vector base_q;
  Vector base_h;

  ScenarioDistribution distribution = FiniteList{{Scenario{}}};

  std::size_t n() const { return c.size(); }
  std::size_t m() const { return first_stage_rows.size(); }
  std::size_t l() const { return base_q.size(); }
  std::size_t r() const { return base_h.size(); }

  bool operator==(const TwoStageProblem&) const = default;
};

/// Baseline data with a scenario's overrides applied.
struct RealizedScenario {
  SparseMatrix T;
  Vector q;
  Vector h;
};

RealizedScenario realize(const TwoStageProblem& problem, const Scenario& scenario);

/// Throws BadInput when dimensions disagree or an override address is out of
/// range. Does not look at feasibility; see validate().
void check_structure(const TwoStageProblem& problem);

struct ValidationReport {
  /// Diameter over-estimate ||ub - lb|| using presolve-tightened bounds.
  double diameter = 0.0;
  Vector tightened_lower;
  Vector tightened_upper;
  /// A point of X (the phase-one vertex used for the feasibility check).
  Vector feasible_point;
  double scenario_count = 0.0;
  std::vector<std::string> notes;
};

/// Throws EmptyFeasibleSet, UnboundedFirstStage or BadProbabilities.
ValidationReport validate(const TwoStageProblem& problem);

/// Activity-based bound tightening over the first-stage rows.
void tighten_bounds(const std::vector<LinearRow>& rows, Vector& lower, Vector& upper,
                    int passes = 8);

/// Throws BadProbabilities when some group is negative or does not sum to 1.
void check_probabilities(const ScenarioDistribution& dist, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Generators

struct InventoryParams {
  std::size_t items = 1;
  Vector price;          // p
  Vector holding;        // h
  double budget = 10.0;  // b
  Vector selling;        // s
  double ratio = 0.5;    // r
  /// Joint customer table: each entry is (probability, customers per item).
  std::vector<std::pair<double, Vector>> customers;
};

/// Buy-then-sell inventory model:
///   first stage  min (p+h)'x  s.t. p'x <= b, 0 <= x <= b/p
///   second stage min -s'y     s.t. y - x <= 0, y <= r c(xi), y >= 0
TwoStageProblem gen_inventory(const InventoryParams& params);

/// The one-item instance used throughout the tests: p=1, h=0.1, b=10, s=2,
/// r=0.5, c in {2, 4} with probability 1/2 each. f* = -0.9 at x* = 1.
TwoStageProblem tiny_inventory();

/// Same data with all customer mass on c = 2 (deterministic).
TwoStageProblem tiny_inventory_deterministic();

/// Random inventory instance with `scenarios` equally likely customer rows.
TwoStageProblem gen_inventory_random(std::size_t items, std::size_t scenarios,
                                     std::uint64_t seed);

struct RandomInstanceParams {
  std::size_t n = 3;
  std::size_t recourse_rows = 3;
  std::size_t extra_columns = 2;
  std::size_t scenarios = 10;
  std::uint64_t seed = 1;
};

/// Random bounded instance with complete recourse: W = [I, -I, R] with
/// positive penalties on the identity columns, so every scenario LP is
/// feasible and bounded for every x.
TwoStageProblem gen_random(const RandomInstanceParams& params);

// ---------------------------------------------------------------------------
// Extensive form

struct LinearProgram;

inline constexpr std::size_t kDefaultExtensiveVariableCap = 60000;

/// Monolithic LP over (x, y_1, ..., y_S), scenarios in input order; the
/// weights of `scenarios` are used as probabilities.
LinearProgram build_extensive_form(const TwoStageProblem& problem,
                                   const std::vector<Scenario>& scenarios,
                                   std::size_t variable_cap = kDefaultExtensiveVariableCap);

}  // namespace tslp
