#include <cmath>

#include "tslp/error.hpp"
#include "tslp/lshaped.hpp"

namespace tslp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

// Gap numerators at roundoff level count as zero.
bool gap_vanished(double gap, double f_star) { return !(gap > 1e-12 * (1.0 + std::abs(f_star))); }

}  // namespace

std::string policy_name(const StepSizePolicy& policy) {
  return std::visit(Overloaded{
                        [](const ConstantPolicy&) { return std::string("constant"); },
                        [](const OptimalPolicy&) { return std::string("optimal"); },
                        [](const PracticalPolicy&) { return std::string("practical"); },
                        [](const SharpConstantPolicy&) { return std::string("sharp-constant"); },
                        [](const SharpOptimalPolicy&) { return std::string("sharp-optimal"); },
                    },
                    policy);
}

void check_policy(const StepSizePolicy& policy) {
  std::visit(Overloaded{
                 [](const ConstantPolicy& p) {
                   if (!positive(p.rho)) throw Error(ErrorCode::BadParameter, "constant policy needs rho > 0");
                 },
                 [](const OptimalPolicy& p) {
                   if (!std::isfinite(p.f_star)) throw Error(ErrorCode::BadParameter, "optimal policy needs finite f*");
                   if (p.diameter && !positive(*p.diameter))
                     throw Error(ErrorCode::BadParameter, "optimal policy needs D > 0");
                   if (!(p.eps2 >= 0.0)) throw Error(ErrorCode::BadParameter, "eps2 must be nonnegative");
                 },
                 [](const PracticalPolicy& p) {
                   if (!positive(p.cp)) throw Error(ErrorCode::BadParameter, "practical policy needs C_P > 0");
                 },
                 [](const SharpConstantPolicy& p) {
                   if (!(p.v > 0.0 && p.v < 1.0)) throw Error(ErrorCode::BadParameter, "sharp constant policy needs 0 < v < 1");
                   if (!positive(p.mu)) throw Error(ErrorCode::BadParameter, "sharp constant policy needs mu > 0");
                   if (!positive(p.eps_bar)) throw Error(ErrorCode::BadParameter, "sharp constant policy needs eps_bar > 0");
                 },
                 [](const SharpOptimalPolicy& p) {
                   if (!positive(p.mu)) throw Error(ErrorCode::BadParameter, "sharp optimal policy needs mu > 0");
                   if (!std::isfinite(p.f_star)) throw Error(ErrorCode::BadParameter, "sharp optimal policy needs finite f*");
                   if (!(p.eps2 >= 0.0)) throw Error(ErrorCode::BadParameter, "eps2 must be nonnegative");
                 },
             },
             policy);
}

std::optional<double> next_step_size(const StepSizePolicy& policy, double beta, std::size_t k,
                                     double fhat_center, std::optional<double> last_model) {
  return std::visit(
      Overloaded{
          [](const ConstantPolicy& p) -> std::optional<double> { return p.rho; },
          [&](const OptimalPolicy& p) -> std::optional<double> {
            if (!p.diameter) throw Error(ErrorCode::MissingParameter, "optimal policy needs the diameter D");
            const double gap = fhat_center - p.eps2 - p.f_star;
            if (gap_vanished(gap, p.f_star)) return std::nullopt;
            return gap / (*p.diameter * *p.diameter);
          },
          [&](const PracticalPolicy& p) -> std::optional<double> {
            if (k != 0 && last_model && fhat_center > *last_model) return p.cp * (fhat_center - *last_model);
            return p.cp;
          },
          [&](const SharpConstantPolicy& p) -> std::optional<double> {
            return beta * p.mu * p.mu * p.v / (2.0 * p.eps_bar);
          },
          [&](const SharpOptimalPolicy& p) -> std::optional<double> {
            const double denom = fhat_center - p.eps2 - p.f_star;
            if (gap_vanished(denom, p.f_star)) return std::nullopt;
            return p.mu * p.mu / denom;
          },
      },
      policy);
}

StepKind serious_test(double fhat_center, double fhat_trial, double model_trial, double beta) {
  return beta * (fhat_center - model_trial) <= fhat_center - fhat_trial ? StepKind::Serious : StepKind::Null;
}

}  // namespace tslp
