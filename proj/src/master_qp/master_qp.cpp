#include "tslp/master_qp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tslp/error.hpp"

namespace tslp {

bool FirstStageRegion::contains(std::span<const double> x, double tol) const {
  for (std::size_t j = 0; j < dim(); ++j) {
    const double scale = 1.0 + std::abs(x[j]);
    if (x[j] < lower[j] - tol * scale || x[j] > upper[j] + tol * scale) return false;
  }
  for (const auto& r : rows) {
    const double act = r.coefficients.dot(x);
    const double t = tol * (1.0 + std::abs(r.rhs));
    if (r.sense != RowSense::GreaterEqual && act > r.rhs + t) return false;
    if (r.sense != RowSense::LessEqual && act < r.rhs - t) return false;
  }
  return true;
}

namespace {

/// a'z >= b (or = b) over z = (x, theta).
struct Constraint {
  Vector a;
  double b = 0.0;
  bool equality = false;
  double norm = 1.0;
};

/// Dense LU with partial pivoting; solves in place. Returns false on a
/// pivot that is negligible relative to the largest entry.
bool lu_solve(std::vector<double>& m, std::size_t n, std::vector<double>& rhs) {
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
    if (std::abs(m[piv * n + c]) <= 1e-14 * scale) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[piv * n + k]);
      std::swap(rhs[c], rhs[piv]);
    }
    const double d = m[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r * n + c] / d;
      if (f == 0.0) continue;
      m[r * n + c] = 0.0;
      for (std::size_t k = c + 1; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
      rhs[r] -= f * rhs[c];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i * n + k] * rhs[k];
    rhs[i] = s / m[i * n + i];
  }
  return true;
}

/// Incremental orthonormal basis used to keep the working set independent.
class RowSpan {
 public:
  bool independent(const Vector& a) const {
    Vector r = residual(a);
    return norm2(r) > 1e-7 * std::max(1.0, norm2(a));
  }
  void push(const Vector& a) {
    Vector r = residual(a);
    const double nr = norm2(r);
    for (double& v : r) v /= nr;
    basis_.push_back(std::move(r));
  }

 private:
  Vector residual(const Vector& a) const {
    Vector r = a;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis_) {
        const double d = dot(q, r);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= d * q[i];
      }
    return r;
  }
  std::vector<Vector> basis_;
};

}  // namespace

ProxResult solve_prox_step(const BundleModel& model, std::span<const double> center, double rho,
                           const FirstStageRegion& region, const ProxOptions& opt,
                           const ProxWarmStart* warm) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::BadParameter, "prox step needs finite rho > 0");
  const std::size_t n = region.dim(), N = n + 1;
  const std::size_t m = region.rows.size();

  // X constraints in the fixed order rows, lower bounds, upper bounds; then cuts.
  std::vector<Constraint> cons;
  std::vector<std::size_t> region_id;  // X-constraint id for each entry of cons
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = region.rows[i];
    Constraint c;
    c.a.assign(N, 0.0);
    const double sgn = r.sense == RowSense::LessEqual ? -1.0 : 1.0;
    for (std::size_t k = 0; k < r.coefficients.size(); ++k) c.a[r.coefficients.index[k]] = sgn * r.coefficients.value[k];
    c.b = sgn * r.rhs;
    c.equality = r.sense == RowSense::Equal;
    cons.push_back(std::move(c));
    region_id.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(region.lower[j])) continue;
    Constraint c;
    c.a.assign(N, 0.0);
    c.a[j] = 1.0;
    c.b = region.lower[j];
    cons.push_back(std::move(c));
    region_id.push_back(m + j);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(region.upper[j])) continue;
    Constraint c;
    c.a.assign(N, 0.0);
    c.a[j] = -1.0;
    c.b = -region.upper[j];
    cons.push_back(std::move(c));
    region_id.push_back(m + n + j);
  }
  const std::size_t first_cut = cons.size();
  for (const auto& cut : model.cuts()) {
    Constraint c;
    c.a.assign(N, 0.0);
    for (std::size_t j = 0; j < n; ++j) c.a[j] = -cut.slope[j];
    c.a[n] = 1.0;
    c.b = cut.value - dot(cut.slope, cut.anchor);
    cons.push_back(std::move(c));
  }
  for (auto& c : cons) c.norm = std::max(1e-300, norm2(c.a));
  const std::size_t total = cons.size();

  // Feasible start.
  Vector z(N);
  if (warm && warm->x.size() == n && region.contains(warm->x)) {
    std::copy(warm->x.begin(), warm->x.end(), z.begin());
  } else if (region.contains(center, 1e-7)) {
    std::copy(center.begin(), center.end(), z.begin());
  } else {
    throw Error(ErrorCode::Infeasible, "prox step has no feasible starting point in X");
  }
  const std::span<const double> zx(z.data(), n);
  const std::size_t top = model.argmax(zx);
  z[n] = model.cuts()[top].at(zx);

  std::vector<std::size_t> work;
  std::vector<bool> in_work(total, false);
  // constraints that made the KKT system numerically singular; kept out of
  // the working set for the rest of this solve
  std::vector<bool> banned(total, false);
  RowSpan span;
  auto try_add = [&](std::size_t i) {
    if (in_work[i] || !span.independent(cons[i].a)) return;
    span.push(cons[i].a);
    work.push_back(i);
    in_work[i] = true;
  };
  for (std::size_t i = 0; i < first_cut; ++i)
    if (cons[i].equality) try_add(i);
  if (warm && std::equal(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n), warm->x.begin())) {
    for (std::size_t id : warm->active) {
      for (std::size_t i = 0; i < first_cut; ++i) {
        if (region_id[i] != id) continue;
        const double slack = dot(cons[i].a, z) - cons[i].b;
        if (std::abs(slack) <= 1e-9 * (1.0 + std::abs(cons[i].b))) try_add(i);
      }
    }
  }
  try_add(first_cut + top);

  const std::size_t limit = opt.iteration_limit ? opt.iteration_limit : 50 * (total + n) + 100;
  Vector grad(N), lambda;
  std::size_t iter = 0;
  // after an unblocked full step z minimizes over the working set, whatever
  // roundoff the next solve leaves in p (it can dominate when rho is tiny)
  bool full_step = false;
  for (;; ++iter) {
    if (iter >= limit)
      throw Error(ErrorCode::IterationLimit, "prox active-set method exceeded " + std::to_string(limit) + " iterations");
    for (std::size_t j = 0; j < n; ++j) grad[j] = rho * (z[j] - center[j]);
    grad[n] = 1.0;

    // [H A'; A 0] [p; mu] = [-grad; 0] with H = rho diag(1..1, 0), solved for
    // rho p so the matrix does not degrade as rho -> 0
    const std::size_t w = work.size(), K = N + w;
    std::vector<double> kkt(K * K, 0.0), rhs(K, 0.0);
    for (std::size_t j = 0; j < n; ++j) kkt[j * K + j] = 1.0;
    for (std::size_t r = 0; r < w; ++r) {
      const auto& a = cons[work[r]].a;
      for (std::size_t j = 0; j < N; ++j) {
        kkt[(N + r) * K + j] = a[j];
        kkt[j * K + N + r] = a[j];
      }
    }
    for (std::size_t j = 0; j < N; ++j) rhs[j] = -grad[j];
    if (!lu_solve(kkt, K, rhs)) {
      std::size_t r = w;
      while (r > 0 && cons[work[r - 1]].equality) --r;
      if (r == 0) throw Error(ErrorCode::NumericalBreakdown, "singular KKT system in prox step");
      banned[work[r - 1]] = true;
      in_work[work[r - 1]] = false;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(r - 1));
      span = RowSpan();
      for (std::size_t i : work) span.push(cons[i].a);
      full_step = false;
      continue;
    }
    for (std::size_t j = 0; j < N; ++j) rhs[j] /= rho;
    // dividing by a small rho amplifies roundoff in A p = 0; project it out
    if (w > 0) {
      std::vector<double> gram(w * w), res(w);
      for (std::size_t r = 0; r < w; ++r) {
        const auto& ar = cons[work[r]].a;
        res[r] = dot(ar, std::span<const double>(rhs.data(), N));
        for (std::size_t c = 0; c < w; ++c) gram[r * w + c] = dot(ar, cons[work[c]].a);
      }
      if (lu_solve(gram, w, res))
        for (std::size_t r = 0; r < w; ++r)
          for (std::size_t j = 0; j < N; ++j) rhs[j] -= res[r] * cons[work[r]].a[j];
    }
    const std::span<const double> p(rhs.data(), N);
    lambda.assign(w, 0.0);
    for (std::size_t r = 0; r < w; ++r) lambda[r] = -rhs[N + r];

    double pmax = 0.0, zmax = 1.0;
    for (std::size_t j = 0; j < N; ++j) {
      pmax = std::max(pmax, std::abs(p[j]));
      zmax = std::max(zmax, std::abs(z[j]));
    }
    if (full_step || pmax <= 1e-12 * zmax) {
      full_step = false;
      std::size_t drop = w;
      double most = -opt.kkt_tol;
      for (std::size_t r = 0; r < w; ++r) {
        if (cons[work[r]].equality) continue;
        if (lambda[r] < most) most = lambda[r], drop = r;
      }
      if (drop == w) break;
      in_work[work[drop]] = false;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(drop));
      span = RowSpan();
      for (std::size_t i : work) span.push(cons[i].a);
      continue;
    }

    double alpha = 1.0;
    std::size_t block = total;
    for (std::size_t i = 0; i < total; ++i) {
      if (in_work[i] || banned[i]) continue;
      const double ap = dot(cons[i].a, p);
      if (ap >= -1e-13 * cons[i].norm * pmax) continue;
      const double slack = std::max(0.0, dot(cons[i].a, z) - cons[i].b);
      const double ratio = slack / -ap;
      // a row in the span of the working set has a'p = 0 up to roundoff
      if (ratio < alpha && span.independent(cons[i].a)) alpha = ratio, block = i;
    }
    for (std::size_t j = 0; j < N; ++j) z[j] += alpha * p[j];
    full_step = block == total;
    if (block != total) {
      span.push(cons[block].a);
      work.push_back(block);
      in_work[block] = true;
    }
  }

  ProxResult res;
  res.iterations = iter;
  res.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  res.model_value = model.eval(res.x);
  double d2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) d2 += (res.x[j] - center[j]) * (res.x[j] - center[j]);
  res.objective = res.model_value + 0.5 * rho * d2;
  res.delta_tilde = model.center_value() - res.objective;

  res.cut_multipliers.assign(model.cuts().size(), 0.0);
  res.region_multipliers.assign(m + 2 * n, 0.0);
  Vector stat = grad;
  for (std::size_t r = 0; r < work.size(); ++r) {
    const std::size_t i = work[r];
    for (std::size_t j = 0; j < N; ++j) stat[j] -= lambda[r] * cons[i].a[j];
    if (i >= first_cut) {
      res.cut_multipliers[i - first_cut] = lambda[r];
    } else {
      res.region_multipliers[region_id[i]] = lambda[r];
      res.warm.active.push_back(region_id[i]);
    }
  }
  double kkt = 0.0;
  for (double v : stat) kkt = std::max(kkt, std::abs(v));
  for (std::size_t i = 0; i < total; ++i) {
    const double slack = dot(cons[i].a, z) - cons[i].b;
    kkt = std::max(kkt, cons[i].equality ? std::abs(slack) : std::max(0.0, -slack) / (1.0 + std::abs(cons[i].b)));
  }
  res.kkt_residual = kkt;
  std::sort(res.warm.active.begin(), res.warm.active.end());
  res.warm.x = res.x;
  return res;
}

}  // namespace tslp
