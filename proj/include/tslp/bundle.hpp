#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tslp/oracle.hpp"
#include "tslp/vector_ops.hpp"

namespace tslp {

enum class CutKind { Gradient, Aggregate };

/// Affine minorant in anchor form: value + slope'(x - anchor).
struct Cut {
  CutKind kind = CutKind::Gradient;
  Vector anchor;
  double value = 0.0;
  Vector slope;
  std::size_t birth = 0;  // inner index that created (or last refreshed) it

  double at(std::span<const double> x) const;
};

inline constexpr std::size_t kDefaultMemory = 5;

/// Max-of-affine model of f_hat_k with per-kind limited memory. When more
/// than `memory` cuts of a kind are held, the one with the oldest birth index
/// is dropped, so the newest cut of each kind always survives. The initial
/// cut is a Gradient cut and is evictable like any other.
class BundleModel {
 public:
  BundleModel() = default;
  BundleModel(std::span<const double> center, const Estimate& at_center, std::size_t memory,
              std::size_t k = 0);

  double eval(std::span<const double> x) const;
  /// Index of the cut attaining the max (lowest index on ties).
  std::size_t argmax(std::span<const double> x) const;

  /// Null-step update at trial x_{t+1}: a Gradient cut from the estimate and
  /// an Aggregate cut (x_{t+1}, model_trial, rho (center - x_{t+1})).
  void add_cuts(std::span<const double> trial, const Estimate& at_trial, double model_trial,
                double rho, std::size_t t);

  /// Inserts one cut. A cut equal to a held cut of the same kind (slope and
  /// value within 1e-12) is not duplicated; the held cut's birth index is
  /// refreshed instead. Returns true when a new cut was stored.
  bool add(Cut cut);

  const std::vector<Cut>& cuts() const { return cuts_; }
  const Vector& center() const { return center_; }
  double center_value() const { return center_value_; }
  std::size_t memory() const { return memory_; }
  std::size_t outer_index() const { return k_; }
  std::size_t count(CutKind kind) const;

 private:
  void evict(CutKind kind);

  std::vector<Cut> cuts_;
  Vector center_;
  double center_value_ = 0.0;
  std::size_t memory_ = kDefaultMemory;
  std::size_t k_ = 0;
};

}  // namespace tslp
