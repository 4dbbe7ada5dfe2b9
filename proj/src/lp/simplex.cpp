#include <algorithm>
#include <cmath>
#include <string>

#include "tslp/error.hpp"
#include "tslp/lp.hpp"

namespace tslp {

namespace {

enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, Free, Fixed };

struct ColumnEntry {
  std::size_t row;
  double value;
};

double pow2_round(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(s))));
}

}  // namespace

struct SimplexSolver::Impl {
  ToleranceSet tol;
  std::size_t m = 0;  // rows
  std::size_t n = 0;  // structural columns

  // Original data.
  Vector cost;
  Vector rhs;
  Vector lower;
  Vector upper;
  std::vector<RowSense> sense;
  std::vector<std::vector<ColumnEntry>> orig_columns;

  // Scaling: scaled a_ij = row_scale_i * a_ij * col_scale_j.
  Vector row_scale;
  Vector col_scale;
  std::vector<std::vector<ColumnEntry>> columns;  // scaled structural columns

  // Working state over N = n + 2m variables: structurals, slacks, artificials.
  std::size_t total = 0;
  Vector lb, ub, x, work_cost;
  std::vector<VarStatus> status;
  std::vector<double> art_sign;
  std::vector<std::size_t> basis;  // basis[k] = variable basic in position k
  std::vector<double> binv;        // row-major m x m
  Vector scaled_rhs;
  std::size_t pivots_since_refactor = 0;
  std::size_t iterations = 0;

  explicit Impl(const LinearProgram& lp, ToleranceSet t) : tol(t) {
    n = lp.num_cols();
    m = lp.num_rows();
    if (lp.lower.size() != n || lp.upper.size() != n)
      throw Error(ErrorCode::BadInput, "linear program bound vectors do not match column count");
    cost = lp.objective;
    lower = lp.lower;
    upper = lp.upper;
    rhs.resize(m);
    sense.resize(m);
    orig_columns.assign(n, {});
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = lp.rows[i];
      rhs[i] = row.rhs;
      sense[i] = row.sense;
      if (!std::isfinite(row.rhs))
        throw Error(ErrorCode::BadInput, "non-finite right-hand side in row " + std::to_string(i));
      for (std::size_t k = 0; k < row.coefficients.size(); ++k) {
        const std::size_t j = row.coefficients.index[k];
        const double a = row.coefficients.value[k];
        if (j >= n) throw Error(ErrorCode::BadInput, "row references column out of range");
        if (!std::isfinite(a)) throw Error(ErrorCode::BadInput, "non-finite coefficient");
        if (a != 0.0) orig_columns[j].push_back({i, a});
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(cost[j])) throw Error(ErrorCode::BadInput, "non-finite objective entry");
      if (lower[j] > upper[j])
        throw Error(ErrorCode::BadInput, "column " + std::to_string(j) + " has lower > upper");
    }
    compute_scaling();
    total = n + 2 * m;
  }

  void compute_scaling() {
    row_scale.assign(m, 1.0);
    col_scale.assign(n, 1.0);
    for (int pass = 0; pass < 4; ++pass) {
      std::vector<double> rmin(m, kInf), rmax(m, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (const auto& e : orig_columns[j]) {
          const double v = std::fabs(e.value) * col_scale[j];
          rmin[e.row] = std::min(rmin[e.row], v);
          rmax[e.row] = std::max(rmax[e.row], v);
        }
      for (std::size_t i = 0; i < m; ++i)
        if (rmax[i] > 0.0) row_scale[i] = pow2_round(1.0 / std::sqrt(rmin[i] * rmax[i]));
      for (std::size_t j = 0; j < n; ++j) {
        double cmin = kInf, cmax = 0.0;
        for (const auto& e : orig_columns[j]) {
          const double v = std::fabs(e.value) * row_scale[e.row];
          cmin = std::min(cmin, v);
          cmax = std::max(cmax, v);
        }
        if (cmax > 0.0) col_scale[j] = pow2_round(1.0 / std::sqrt(cmin * cmax));
      }
    }
    columns.assign(n, {});
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& e : orig_columns[j])
        columns[j].push_back({e.row, e.value * row_scale[e.row] * col_scale[j]});
  }

  // Column entries of any working variable.
  template <class F>
  void for_column(std::size_t var, F&& f) const {
    if (var < n) {
      for (const auto& e : columns[var]) f(e.row, e.value);
    } else if (var < n + m) {
      f(var - n, 1.0);
    } else {
      f(var - n - m, art_sign[var - n - m]);
    }
  }

  double dtol() const { return tol.complementarity; }

  void setup_start() {
    lb.assign(total, 0.0);
    ub.assign(total, 0.0);
    x.assign(total, 0.0);
    status.assign(total, VarStatus::AtLower);
    art_sign.assign(m, 1.0);
    scaled_rhs.resize(m);
    for (std::size_t j = 0; j < n; ++j) {
      lb[j] = lower[j] / col_scale[j];
      ub[j] = upper[j] / col_scale[j];
      if (lb[j] == ub[j]) {
        status[j] = VarStatus::Fixed;
        x[j] = lb[j];
      } else if (std::isfinite(lb[j])) {
        status[j] = VarStatus::AtLower;
        x[j] = lb[j];
      } else if (std::isfinite(ub[j])) {
        status[j] = VarStatus::AtUpper;
        x[j] = ub[j];
      } else {
        status[j] = VarStatus::Free;
        x[j] = 0.0;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = n + i;
      switch (sense[i]) {
        case RowSense::LessEqual: lb[s] = 0.0; ub[s] = kInf; break;
        case RowSense::GreaterEqual: lb[s] = -kInf; ub[s] = 0.0; break;
        case RowSense::Equal: lb[s] = 0.0; ub[s] = 0.0; break;
      }
      scaled_rhs[i] = rhs[i] * row_scale[i];
    }
    // Residual after nonbasic structurals are placed at their bounds.
    Vector residual = scaled_rhs;
    for (std::size_t j = 0; j < n; ++j)
      if (x[j] != 0.0)
        for (const auto& e : columns[j]) residual[e.row] -= e.value * x[j];

    basis.assign(m, 0);
    binv.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = n + i;
      const std::size_t a = n + m + i;
      const double r = residual[i];
      const bool slack_ok = r >= lb[s] && r <= ub[s];
      if (slack_ok) {
        basis[i] = s;
        status[s] = VarStatus::Basic;
        x[s] = r;
        binv[i * m + i] = 1.0;
        lb[a] = ub[a] = 0.0;
        status[a] = VarStatus::Fixed;
        x[a] = 0.0;
      } else {
        status[s] = std::isfinite(lb[s]) ? (lb[s] == ub[s] ? VarStatus::Fixed : VarStatus::AtLower)
                                         : VarStatus::AtUpper;
        x[s] = 0.0;
        art_sign[i] = r >= 0.0 ? 1.0 : -1.0;
        basis[i] = a;
        status[a] = VarStatus::Basic;
        lb[a] = 0.0;
        ub[a] = kInf;
        x[a] = std::fabs(r);
        binv[i * m + i] = art_sign[i];
      }
    }
    pivots_since_refactor = 0;
    iterations = 0;
  }

  void refactor() {
    // Gauss-Jordan with partial pivoting on the dense basis matrix.
    std::vector<double> b(m * m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
      for_column(basis[k], [&](std::size_t row, double v) { b[row * m + k] = v; });
    std::vector<double> inv(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      double best = std::fabs(b[col * m + col]);
      for (std::size_t i = col + 1; i < m; ++i)
        if (std::fabs(b[i * m + col]) > best) {
          best = std::fabs(b[i * m + col]);
          piv = i;
        }
      if (best < 1e-13)
        throw Error(ErrorCode::NumericalBreakdown, "singular basis during refactorization");
      if (piv != col)
        for (std::size_t j = 0; j < m; ++j) {
          std::swap(b[piv * m + j], b[col * m + j]);
          std::swap(inv[piv * m + j], inv[col * m + j]);
        }
      const double d = b[col * m + col];
      for (std::size_t j = 0; j < m; ++j) {
        b[col * m + j] /= d;
        inv[col * m + j] /= d;
      }
      for (std::size_t i = 0; i < m; ++i) {
        if (i == col) continue;
        const double f = b[i * m + col];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) {
          b[i * m + j] -= f * b[col * m + j];
          inv[i * m + j] -= f * inv[col * m + j];
        }
      }
    }
    // Rows of `inv` now correspond to basis positions.
    binv = std::move(inv);
    double growth = 0.0;
    for (double v : binv) growth = std::max(growth, std::fabs(v));
    if (growth > tol.breakdown)
      throw Error(ErrorCode::NumericalBreakdown, "basis inverse growth exceeds threshold");
    recompute_basic_values();
    pivots_since_refactor = 0;
  }

  void recompute_basic_values() {
    Vector r = scaled_rhs;
    for (std::size_t v = 0; v < total; ++v) {
      if (status[v] == VarStatus::Basic || x[v] == 0.0) continue;
      const double xv = x[v];
      for_column(v, [&](std::size_t row, double a) { r[row] -= a * xv; });
    }
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      const double* bi = &binv[k * m];
      for (std::size_t i = 0; i < m; ++i) s += bi[i] * r[i];
      x[basis[k]] = s;
    }
  }

  void compute_duals(Vector& y) const {
    y.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double cb = work_cost[basis[k]];
      if (cb == 0.0) continue;
      const double* bk = &binv[k * m];
      for (std::size_t i = 0; i < m; ++i) y[i] += cb * bk[i];
    }
  }

  double reduced_cost(std::size_t v, const Vector& y) const {
    double d = work_cost[v];
    for_column(v, [&](std::size_t row, double a) { d -= y[row] * a; });
    return d;
  }

  enum class PhaseResult { Optimal, Unbounded };

  PhaseResult iterate(std::size_t limit) {
    Vector y, alpha(m);
    bool bland = false;
    std::size_t stall = 0;
    const std::size_t stall_limit = 2 * (m + total);
    while (true) {
      if (iterations >= limit)
        throw Error(ErrorCode::IterationLimit,
                    "simplex exceeded " + std::to_string(limit) + " iterations");
      compute_duals(y);

      // Pricing.
      std::size_t q = total;
      double best = 0.0, dq = 0.0;
      for (std::size_t v = 0; v < total; ++v) {
        const VarStatus st = status[v];
        if (st == VarStatus::Basic || st == VarStatus::Fixed) continue;
        const double d = reduced_cost(v, y);
        bool eligible = false;
        if (st == VarStatus::AtLower) eligible = d < -dtol();
        else if (st == VarStatus::AtUpper) eligible = d > dtol();
        else eligible = std::fabs(d) > dtol();
        if (!eligible) continue;
        if (bland) {
          q = v;
          dq = d;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          q = v;
          dq = d;
        }
      }
      if (q == total) return PhaseResult::Optimal;

      // alpha = B^-1 a_q
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for_column(q, [&](std::size_t row, double a) {
        for (std::size_t k = 0; k < m; ++k) alpha[k] += binv[k * m + row] * a;
      });
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      // Ratio test (Harris two-pass; exact minimum with lowest index in Bland mode).
      const double ftol = tol.feasibility;
      double t_relaxed = kInf;
      for (std::size_t k = 0; k < m; ++k) {
        if (std::fabs(alpha[k]) <= tol.pivot) continue;
        const std::size_t v = basis[k];
        const double delta = -dir * alpha[k];
        if (delta < 0.0 && std::isfinite(lb[v]))
          t_relaxed = std::min(t_relaxed, (x[v] - lb[v] + ftol) / -delta);
        else if (delta > 0.0 && std::isfinite(ub[v]))
          t_relaxed = std::min(t_relaxed, (ub[v] - x[v] + ftol) / delta);
      }
      const double span = ub[q] - lb[q];  // inf when either bound is infinite
      std::size_t leave = m;
      double t_leave = kInf;
      if (std::isfinite(t_relaxed)) {
        double best_pivot = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          if (std::fabs(alpha[k]) <= tol.pivot) continue;
          const std::size_t v = basis[k];
          const double delta = -dir * alpha[k];
          double t;
          if (delta < 0.0 && std::isfinite(lb[v])) t = (x[v] - lb[v]) / -delta;
          else if (delta > 0.0 && std::isfinite(ub[v])) t = (ub[v] - x[v]) / delta;
          else continue;
          if (bland) {
            if (t < t_leave - 1e-12 ||
                (std::fabs(t - t_leave) <= 1e-12 && (leave == m || v < basis[leave]))) {
              t_leave = t;
              leave = k;
            }
          } else if (t <= t_relaxed && std::fabs(alpha[k]) > best_pivot) {
            best_pivot = std::fabs(alpha[k]);
            leave = k;
            t_leave = t;
          }
        }
        t_leave = std::max(0.0, t_leave);
      }

      if (leave == m && !std::isfinite(span)) return PhaseResult::Unbounded;
      ++iterations;

      if (leave == m || span <= t_leave) {
        // Bound flip of the entering variable.
        const double t = span;
        for (std::size_t k = 0; k < m; ++k) x[basis[k]] += -dir * alpha[k] * t;
        if (status[q] == VarStatus::AtLower) {
          status[q] = VarStatus::AtUpper;
          x[q] = ub[q];
        } else {
          status[q] = VarStatus::AtLower;
          x[q] = lb[q];
        }
        stall = 0;
        continue;
      }

      const double t = t_leave;
      for (std::size_t k = 0; k < m; ++k) x[basis[k]] += -dir * alpha[k] * t;
      x[q] += dir * t;
      const std::size_t out = basis[leave];
      const double delta_out = -dir * alpha[leave];
      if (delta_out < 0.0) {
        x[out] = lb[out];
        status[out] = VarStatus::AtLower;
      } else {
        x[out] = ub[out];
        status[out] = VarStatus::AtUpper;
      }
      if (out >= n + m) {
        // Artificials never re-enter.
        lb[out] = ub[out] = 0.0;
        x[out] = 0.0;
        status[out] = VarStatus::Fixed;
      } else if (lb[out] == ub[out]) {
        status[out] = VarStatus::Fixed;
      }
      basis[leave] = q;
      status[q] = VarStatus::Basic;

      // Product-form update of the explicit inverse.
      const double piv = alpha[leave];
      double* br = &binv[leave * m];
      for (std::size_t i = 0; i < m; ++i) br[i] /= piv;
      for (std::size_t k = 0; k < m; ++k) {
        if (k == leave || alpha[k] == 0.0) continue;
        const double f = alpha[k];
        double* bk = &binv[k * m];
        for (std::size_t i = 0; i < m; ++i) bk[i] -= f * br[i];
      }
      if (++pivots_since_refactor >= 64) refactor();

      if (t * std::fabs(dq) <= 1e-12) {
        if (++stall > stall_limit) bland = true;
      } else {
        stall = 0;
      }
    }
  }

  LpSolution solve() {
    setup_start();
    std::size_t limit = tol.iteration_limit ? tol.iteration_limit : 100 * (m + n) + 1000;

    bool need_phase1 = false;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= n + m && x[basis[i]] > 0.0) need_phase1 = true;

    LpSolution sol;
    if (need_phase1) {
      work_cost.assign(total, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        if (status[n + m + i] == VarStatus::Basic) work_cost[n + m + i] = 1.0;
      iterate(limit);
      refactor();
      double infeas = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (status[n + m + i] == VarStatus::Basic) infeas += std::fabs(x[n + m + i]);
      double scale = 1.0;
      for (double v : scaled_rhs) scale = std::max(scale, std::fabs(v));
      if (infeas > tol.feasibility * scale) {
        sol.status = LpStatus::Infeasible;
        sol.iterations = iterations;
        return sol;
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t a = n + m + i;
      lb[a] = ub[a] = 0.0;
      if (status[a] != VarStatus::Basic) {
        status[a] = VarStatus::Fixed;
        x[a] = 0.0;
      }
    }
    work_cost.assign(total, 0.0);
    for (std::size_t j = 0; j < n; ++j) work_cost[j] = cost[j] * col_scale[j];
    const PhaseResult pr = iterate(limit);
    sol.iterations = iterations;
    if (pr == PhaseResult::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    refactor();
    // Basic artificials sit at zero; clamp round-off in basic variables.
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t v = basis[k];
      if (x[v] < lb[v] && x[v] > lb[v] - tol.feasibility) x[v] = lb[v];
      if (x[v] > ub[v] && x[v] < ub[v] + tol.feasibility) x[v] = ub[v];
    }
    extract(sol);
    return sol;
  }

  void extract(LpSolution& sol) {
    sol.status = LpStatus::Optimal;
    sol.x.resize(n);
    for (std::size_t j = 0; j < n; ++j) sol.x[j] = x[j] * col_scale[j];
    Vector y;
    compute_duals(y);
    sol.duals.resize(m);
    for (std::size_t i = 0; i < m; ++i) sol.duals[i] = y[i] * row_scale[i];

    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += cost[j] * sol.x[j];

    sol.reduced_costs = cost;
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& e : orig_columns[j]) sol.reduced_costs[j] -= sol.duals[e.row] * e.value;

    // Certification on the original data.
    Vector activity(m, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (const auto& e : orig_columns[j]) activity[e.row] += e.value * sol.x[j];
    double pres = 0.0, dres = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = activity[i] - rhs[i];
      const double w = 1.0 + std::fabs(rhs[i]);
      double viol = 0.0;
      if (sense[i] == RowSense::LessEqual) viol = std::max(0.0, s);
      else if (sense[i] == RowSense::GreaterEqual) viol = std::max(0.0, -s);
      else viol = std::fabs(s);
      pres = std::max(pres, viol / w);
      const double yi = sol.duals[i];
      if (sense[i] == RowSense::LessEqual) dres = std::max(dres, std::max(0.0, yi));
      if (sense[i] == RowSense::GreaterEqual) dres = std::max(dres, std::max(0.0, -yi));
      comp = std::max(comp, std::fabs(yi * s));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = sol.x[j];
      const double w = 1.0 + std::fabs(xj);
      if (std::isfinite(lower[j])) pres = std::max(pres, std::max(0.0, lower[j] - xj) / w);
      if (std::isfinite(upper[j])) pres = std::max(pres, std::max(0.0, xj - upper[j]) / w);
      const double d = sol.reduced_costs[j];
      const bool at_lo = std::isfinite(lower[j]) && std::fabs(xj - lower[j]) <= 1e-9 * w;
      const bool at_up = std::isfinite(upper[j]) && std::fabs(xj - upper[j]) <= 1e-9 * w;
      double viol = 0.0;
      if (at_lo && at_up) viol = 0.0;
      else if (at_lo) viol = std::max(0.0, -d);
      else if (at_up) viol = std::max(0.0, d);
      else viol = std::fabs(d);
      dres = std::max(dres, viol);
      if (!at_lo && !at_up) comp = std::max(comp, std::fabs(d * xj));
    }
    double cscale = 1.0;
    for (double c : cost) cscale = std::max(cscale, std::fabs(c));
    sol.primal_residual = pres;
    sol.dual_residual = dres / cscale;
    sol.duality_gap = comp / (1.0 + std::fabs(sol.objective));
    if (pres > 1e-6)
      throw Error(ErrorCode::NumericalBreakdown,
                  "primal residual " + std::to_string(pres) + " after optimal basis");
  }
};

SimplexSolver::SimplexSolver(const LinearProgram& lp, ToleranceSet tol)
    : impl_(std::make_unique<Impl>(lp, tol)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

void SimplexSolver::set_rhs(std::size_t row, double value) { impl_->rhs.at(row) = value; }
void SimplexSolver::set_objective(std::size_t col, double value) { impl_->cost.at(col) = value; }

LpSolution SimplexSolver::solve() { return impl_->solve(); }

LpSolution solve_lp(const LinearProgram& lp, const ToleranceSet& tol) {
  SimplexSolver solver(lp, tol);
  return solver.solve();
}

}  // namespace tslp
