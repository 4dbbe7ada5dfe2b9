#include <algorithm>
#include <cmath>
#include <limits>

#include "tslp/bundle.hpp"
#include "tslp/error.hpp"
#include "tslp/lshaped.hpp"

namespace tslp {

ProximalGap exact_proximal_gap(const TwoStageProblem& problem, std::span<const double> center, double rho,
                               double tol, double cap) {
  if (!(rho > 0.0)) throw Error(ErrorCode::BadParameter, "rho must be positive");
  const SampleSet full = full_scenario_set(problem.distribution, cap);
  const FirstStageRegion region = FirstStageRegion::of(problem);
  Oracle oracle(problem);
  const Estimate at_center = oracle.estimate(full, center);
  const double fc = at_center.value;

  BundleModel model(center, at_center, std::numeric_limits<std::size_t>::max() / 4);
  std::optional<ProxWarmStart> warm;
  const std::size_t limit = 10000;
  for (std::size_t it = 1; it <= limit; ++it) {
    const ProxResult prox = solve_prox_step(model, center, rho, region, {}, warm ? &*warm : nullptr);
    const Estimate at_x = oracle.estimate(full, prox.x);
    const double gap = at_x.value - prox.model_value;
    if (gap <= tol * (1.0 + std::abs(at_x.value))) {
      ProximalGap out;
      const double d2 = distance(prox.x, center);
      out.delta = fc - (at_x.value + 0.5 * rho * d2 * d2);
      out.delta_upper = fc - prox.objective;
      out.x_prox = prox.x;
      out.iterations = it;
      return out;
    }
    Cut cut;
    cut.kind = CutKind::Gradient;
    cut.anchor = prox.x;
    cut.value = at_x.value;
    cut.slope = at_x.subgradient;
    cut.birth = it;
    if (!model.add(cut))
      throw Error(ErrorCode::NumericalBreakdown, "cutting-plane loop stalled on a repeated cut");
    warm = prox.warm;
  }
  throw Error(ErrorCode::IterationLimit, "exact proximal gap did not converge");
}

double inner_loop_bound(double G, double rho, double beta, double gap) {
  if (!(gap > 0.0)) return kInf;
  const double omb2 = (1.0 - beta) * (1.0 - beta);
  const double v = std::ceil(8.0 * G * G / (rho * omb2 * gap) - 16.0 / omb2) + 1.0;
  return std::max(1.0, v);
}

double proximal_gap_lower_bound(double gap, double rho, double D) {
  if (gap <= 0.0) return 0.0;
  if (gap <= rho * D * D) return gap * gap / (2.0 * rho * D * D);
  return gap / 2.0;
}

std::optional<double> sharp_gap_lower_bound(double gap, double rho, double mu) {
  if (gap >= mu * mu / rho) return mu * mu / (2.0 * rho);
  return std::nullopt;
}

namespace {

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw Error(ErrorCode::MissingParameter, std::string("theory bounds need ") + name);
  return *v;
}

// ceil that ignores roundoff just above an integer
double ceil_g(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) return r;
  return std::ceil(v);
}

double ceil_pos(double v) { return std::max(0.0, ceil_g(v)); }

}  // namespace

TheoryBounds theory_bounds(const TheoryInputs& in, BoundFamily family) {
  if (!(in.beta > 0.0 && in.beta < 1.0)) throw Error(ErrorCode::BadParameter, "beta must lie in (0, 1)");
  if (!(in.eps1 >= 0.0 && in.eps2 >= 0.0)) throw Error(ErrorCode::BadParameter, "noise bounds must be nonnegative");
  const double beta = in.beta;
  const double omb2 = (1.0 - beta) * (1.0 - beta);

  TheoryBounds b;
  b.family = family;
  b.eps_bar = (beta + 1.0) * (in.eps1 + in.eps2);
  b.exact_oracle = b.eps_bar == 0.0;
  const double eb = b.eps_bar;
  const double gap0 = need(in.f0, "f(x_00)") - need(in.f_star, "f*");

  switch (family) {
    case BoundFamily::Constant: {
      const double rho = need(in.rho, "rho");
      const double D = need(in.D, "D");
      b.delta = std::max(4.0 * eb / beta, std::sqrt(4.0 * eb * rho / beta) * D);
      if (b.exact_oracle) break;
      b.outer = ceil_pos((gap0 - b.delta) / eb);
      if (in.G) {
        b.inner_per_outer = inner_loop_bound(*in.G, rho, beta, eb);
        b.total_inner = *b.outer * *b.inner_per_outer;
      }
      break;
    }
    case BoundFamily::Optimal: {
      b.delta = 4.0 * eb / beta;
      if (b.exact_oracle) break;
      b.outer = gap0 <= b.delta ? 0.0 : ceil_pos(std::log(gap0 / b.delta) / -std::log(1.0 - beta / 4.0));
      if (in.G && in.D) {
        const double G = *in.G, D = *in.D;
        b.total_inner = 32.0 * G * G * D * D / (3.0 * omb2 * (2.0 - beta / 4.0) * eb * eb);
      }
      break;
    }
    case BoundFamily::SharpConstant: {
      const double mu = need(in.mu, "mu");
      const double v = need(in.v, "v");
      if (!(v > 0.0 && v < 1.0)) throw Error(ErrorCode::BadParameter, "v must lie in (0, 1)");
      b.delta = 4.0 * eb / beta;
      if (b.exact_oracle) break;
      const double A = std::max(1.0, ceil_g((gap0 - 4.0 * eb / beta) / ((1.0 / v - 1.0) * eb)) + 1.0);
      if (v >= 0.5) {
        b.outer = A;
      } else {
        const double extra = ceil_g(-std::log(1.0 / v - 1.0) / std::log(1.0 - beta / 2.0));
        b.outer = A + extra + 1.0;
      }
      if (in.G) {
        const double G = *in.G;
        const double per = ceil_g(16.0 / omb2 * (G * G / ((1.0 - v) * mu * mu) - 1.0)) + 1.0;
        if (v >= 0.5) {
          b.total_inner = A * per;
        } else {
          const double A2 =
              std::max(1.0, ceil_g((gap0 - 2.0 * eb / (beta * v)) / ((1.0 / v - 1.0) * eb)) + 1.0);
          b.total_inner = A2 * per + 32.0 * G * G / (mu * mu * v * beta * omb2);
        }
      }
      break;
    }
    case BoundFamily::SharpOptimal: {
      b.delta = 4.0 * eb / beta;
      if (b.exact_oracle) break;
      const double arg = (gap0 - 3.0 * eb / beta) / (eb / beta);
      b.outer = arg <= 0.0 ? 0.0 : ceil_pos(-std::log(arg) / std::log(1.0 - beta / 2.0));
      if (in.G && in.mu) {
        const double G = *in.G, mu = *in.mu;
        b.total_inner =
            16.0 * G * G / (omb2 * mu * mu * (1.0 - 2.0 * beta / (3.0 * (beta + 1.0)))) * *b.outer;
      }
      break;
    }
  }
  return b;
}

std::vector<TraceViolation> check_trace(const RunTrace& trace, double beta, double G, double tol) {
  std::vector<TraceViolation> out;
  auto flag = [&](const InnerRecord& r, std::string what) { out.push_back({r.k, r.t, std::move(what)}); };
  const InnerRecord* prev = nullptr;
  for (const auto& r : trace.inner) {
    if (r.kind == StepKind::Serious) {
      if (r.fhat_trial > r.fhat_center - beta * (r.fhat_center - r.model_trial) + tol)
        flag(r, "serious step without sufficient decrease");
    } else if (!(r.fhat_trial - r.model_trial > (1.0 - beta) * r.delta_tilde - tol)) {
      flag(r, "null step below (1-beta) delta_tilde");
    }
    if (r.t == 0) {
      if (r.delta_tilde > G * G / (2.0 * r.rho) + tol) flag(r, "delta_tilde_0 above G^2/(2 rho)");
    } else if (prev && prev->k == r.k && r.delta_tilde > prev->delta_tilde + tol) {
      flag(r, "delta_tilde increased within the outer iteration");
    }
    prev = &r;
  }
  return out;
}

}  // namespace tslp
