#include "cogmask/strategy.hpp"

#include <cmath>
#include <stdexcept>

namespace cogmask {
namespace {

constexpr double kBoundaryEps = 1e-12;
constexpr double kFdStep = 1e-8;

}  // namespace

Strategy Strategy::sqrt_sum() { return Strategy(Family::SqrtSum, StrategyRole::Utility, "sqrt-sum"); }

Strategy Strategy::quadratic_sum() {
  return Strategy(Family::QuadraticSum, StrategyRole::Utility, "quadratic-sum");
}

Strategy Strategy::cobb_douglas(Vec exponents) {
  for (double e : exponents)
    if (e < 0.0) throw std::invalid_argument("cobb_douglas: exponents must be nonnegative");
  Strategy s(Family::CobbDouglas, StrategyRole::Utility, "cobb-douglas");
  s.params_ = std::move(exponents);
  return s;
}

Strategy Strategy::linear_budget(Vec weights) {
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("linear_budget: weights must be nonnegative");
  Strategy s(Family::LinearBudget, StrategyRole::Constraint, "linear-budget");
  s.params_ = std::move(weights);
  return s;
}

Strategy Strategy::k_norm(double kappa) {
  if (!(kappa > 1.0)) throw std::invalid_argument("k_norm: kappa must exceed 1");
  Strategy s(Family::KNorm, StrategyRole::Constraint, "k-norm");
  s.scalar_ = kappa;
  return s;
}

Strategy Strategy::k_norm_cap(double kappa, double cap) {
  Strategy s = k_norm(kappa);
  s.offset_ = -cap;
  s.name_ = "k-norm-cap";
  return s;
}

Strategy Strategy::custom(std::string name, StrategyRole role, ValueFn value, GradFn grad) {
  if (!value) throw std::invalid_argument("custom: value function required");
  Strategy s(Family::Custom, role, std::move(name));
  s.custom_value_ = std::move(value);
  s.custom_grad_ = std::move(grad);
  return s;
}

double Strategy::value(std::span<const double> x) const {
  // The linear budget extends literally to negative (noisy) responses; the
  // other families are defined on the nonnegative orthant and clamp.
  switch (family_) {
    case Family::LinearBudget:
      return dot(params_, x) - 1.0;
    case Family::SqrtSum: {
      double s = 0.0;
      for (double v : x) s += std::sqrt(std::max(0.0, v));
      return s;
    }
    case Family::QuadraticSum: {
      double s = 0.0;
      for (double v : x) {
        const double c = std::max(0.0, v);
        s += c * c;
      }
      return s;
    }
    case Family::CobbDouglas: {
      double p = 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) p *= std::pow(std::max(0.0, x[i]), params_[i]);
      return p;
    }
    case Family::KNorm: {
      double s = 0.0;
      for (double v : x) s += std::pow(std::max(0.0, v), scalar_);
      return std::pow(s, 1.0 / scalar_) + offset_;
    }
    case Family::Custom:
      return custom_value_(clamped_nonneg(x));
  }
  return 0.0;
}

Vec Strategy::gradient(std::span<const double> x) const {
  Vec c = clamped_nonneg(x);
  Vec g(c.size(), 0.0);
  bool analytic_ok = true;
  switch (family_) {
    case Family::SqrtSum:
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] > kBoundaryEps)
          g[i] = 0.5 / std::sqrt(c[i]);
        else
          analytic_ok = false;
      }
      break;
    case Family::QuadraticSum:
      for (std::size_t i = 0; i < c.size(); ++i) g[i] = 2.0 * c[i];
      break;
    case Family::CobbDouglas: {
      const double v = value(c);
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (params_[i] == 0.0)
          g[i] = 0.0;
        else if (c[i] > kBoundaryEps)
          g[i] = params_[i] * v / c[i];
        else
          analytic_ok = false;
      }
      break;
    }
    case Family::LinearBudget:
      g = params_;
      break;
    case Family::KNorm: {
      double s = 0.0;
      for (double v : c) s += std::pow(v, scalar_);
      if (s > kBoundaryEps) {
        const double nk = std::pow(s, 1.0 / scalar_ - 1.0);
        for (std::size_t i = 0; i < c.size(); ++i) g[i] = nk * std::pow(c[i], scalar_ - 1.0);
      } else {
        analytic_ok = false;
      }
      break;
    }
    case Family::Custom:
      if (custom_grad_) {
        g = custom_grad_(c);
      } else {
        analytic_ok = false;
      }
      break;
  }
  if (analytic_ok) return g;

  // One-sided finite differences for components the analytic form cannot
  // cover (boundary singularities, missing custom gradient).
  Vec probe = c;
  const double base = value(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::isfinite(g[i]) && g[i] != 0.0) continue;
    const bool singular = (family_ == Family::Custom && !custom_grad_) || c[i] <= kBoundaryEps;
    if (!singular) continue;
    probe[i] = c[i] + kFdStep;
    g[i] = (value(probe) - base) / kFdStep;
    probe[i] = c[i];
  }
  return g;
}

}  // namespace cogmask
