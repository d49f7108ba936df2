#pragma once

#include <functional>
#include <span>
#include <string>

#include "cogmask/vecmath.hpp"

namespace cogmask {

enum class StrategyRole { Utility, Constraint };

/// A utility or constraint function on the nonnegative orthant with gradient
/// access.
///
/// Evaluation clamps the argument componentwise at zero, so strategies stay
/// finite on noisy (possibly negative) response measurements. Gradients are
/// analytic in the interior; components whose analytic derivative is singular
/// at the boundary fall back to a one-sided finite difference.
class Strategy {
 public:
  enum class Family { SqrtSum, QuadraticSum, CobbDouglas, LinearBudget, KNorm, Custom };

  using ValueFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<Vec(std::span<const double>)>;

  /// sum_i sqrt(x_i), concave monotone utility.
  static Strategy sqrt_sum();
  /// sum_i x_i^2, convex monotone utility.
  static Strategy quadratic_sum();
  /// prod_i x_i^{e_i} with nonnegative exponents.
  static Strategy cobb_douglas(Vec exponents);
  /// w'x - 1, the unit-level linear budget constraint.
  static Strategy linear_budget(Vec weights);
  /// ||x||_kappa, kappa > 1.
  static Strategy k_norm(double kappa);
  /// ||x||_kappa - cap, constraint form g(x) <= 0.
  static Strategy k_norm_cap(double kappa, double cap);
  static Strategy custom(std::string name, StrategyRole role, ValueFn value, GradFn grad = nullptr);

  double value(std::span<const double> x) const;
  Vec gradient(std::span<const double> x) const;

  Family family() const { return family_; }
  StrategyRole role() const { return role_; }
  const Vec& params() const { return params_; }
  double scalar_param() const { return scalar_; }
  double offset() const { return offset_; }
  const std::string& name() const { return name_; }

 private:
  Strategy(Family f, StrategyRole r, std::string name) : family_(f), role_(r), name_(std::move(name)) {}

  Family family_;
  StrategyRole role_;
  Vec params_;
  double scalar_ = 0.0;
  double offset_ = 0.0;
  ValueFn custom_value_;
  GradFn custom_grad_;
  std::string name_;
};

}  // namespace cogmask
