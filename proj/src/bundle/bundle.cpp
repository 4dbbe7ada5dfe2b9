#include "tslp/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "tslp/error.hpp"

namespace tslp {

double Cut::at(std::span<const double> x) const {
  double v = value;
  for (std::size_t j = 0; j < slope.size(); ++j) v += slope[j] * (x[j] - anchor[j]);
  return v;
}

BundleModel::BundleModel(std::span<const double> center, const Estimate& at_center, std::size_t memory,
                         std::size_t k)
    : center_(center.begin(), center.end()), center_value_(at_center.value), memory_(memory), k_(k) {
  if (memory == 0) throw Error(ErrorCode::BadParameter, "bundle memory must be at least 1");
  cuts_.push_back({CutKind::Gradient, center_, at_center.value, at_center.subgradient, 0});
}

double BundleModel::eval(std::span<const double> x) const { return cuts_[argmax(x)].at(x); }

std::size_t BundleModel::argmax(std::span<const double> x) const {
  std::size_t best = 0;
  double v = cuts_[0].at(x);
  for (std::size_t i = 1; i < cuts_.size(); ++i) {
    const double w = cuts_[i].at(x);
    if (w > v) v = w, best = i;
  }
  return best;
}

void BundleModel::add_cuts(std::span<const double> trial, const Estimate& at_trial, double model_trial,
                           double rho, std::size_t t) {
  const Vector x(trial.begin(), trial.end());
  add({CutKind::Gradient, x, at_trial.value, at_trial.subgradient, t + 1});
  Vector s(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) s[j] = rho * (center_[j] - x[j]);
  add({CutKind::Aggregate, x, model_trial, std::move(s), t + 1});
}

bool BundleModel::add(Cut cut) {
  for (auto& c : cuts_) {
    if (c.kind != cut.kind) continue;
    if (max_abs_diff(c.slope, cut.slope) > 1e-12) continue;
    if (std::abs(c.at(cut.anchor) - cut.value) > 1e-12) continue;
    c.birth = std::max(c.birth, cut.birth);
    return false;
  }
  const CutKind kind = cut.kind;
  cuts_.push_back(std::move(cut));
  evict(kind);
  return true;
}

std::size_t BundleModel::count(CutKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(cuts_.begin(), cuts_.end(), [&](const Cut& c) { return c.kind == kind; }));
}

void BundleModel::evict(CutKind kind) {
  while (count(kind) > memory_) {
    std::size_t victim = cuts_.size();
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
      if (cuts_[i].kind != kind) continue;
      if (victim == cuts_.size() || cuts_[i].birth < cuts_[victim].birth) victim = i;
    }
    cuts_.erase(cuts_.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

}  // namespace tslp
