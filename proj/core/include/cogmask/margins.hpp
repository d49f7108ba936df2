#pragma once

#include <functional>
#include <limits>

#include "cogmask/afriat.hpp"
#include "cogmask/dataset.hpp"
#include "cogmask/strategy.hpp"

namespace cogmask {

/// Feasibility margin of a strategy against a dataset: the smallest uniform
/// relaxation that pushes the strategy's projected inequality system to the
/// failure boundary. Zero when some projected inequality is already tight or
/// violated.
struct MarginResult {
  double margin = 0.0;
  std::size_t binding_s = 0, binding_t = 0;  // ordered pair attaining the max
  Vec theta_used;
};

/// Margin of a candidate utility on a constraint-known dataset. Closed form:
/// the clipped maximum over ordered pairs (s,t) of
///   u(b_t) - u(b_s) + lambda_t a_t'(b_s - b_t).
MarginResult margin_utility(const Strategy& u, const ProbeResponseDataset& d);

/// Margin of a candidate constraint on a utility-known dataset (reversed
/// system direction).
MarginResult margin_constraint(const Strategy& g, const ProbeResponseDataset& d);

/// Multi-constraint margin; per-step multipliers are recovered by
/// nonnegative least squares on the KKT stationarity residual. Throws when
/// no multipliers reproduce stationarity within `kkt_tol` relative error.
MarginResult margin_utility_multi(const Strategy& u, const ProbeResponseDataset& d,
                                  const std::vector<ConstraintBuilder>& constraints,
                                  double kkt_tol = 1e-3);

/// Residuals of an arbitrary set-valued reconstruction test, in the
/// satisfied-means-<=0 convention.
using IrlSystemEvaluator =
    std::function<std::vector<double>(const Strategy&, const ProbeResponseDataset&)>;

/// Margin for an arbitrary evaluator: max(0, max_i -residual_i).
MarginResult margin_generic(const IrlSystemEvaluator& eval, const Strategy& s,
                            const ProbeResponseDataset& d);

/// The pairwise-system evaluator; margin_generic with this evaluator matches
/// margin_utility / margin_constraint.
std::vector<double> afriat_residuals(const Strategy& s, const ProbeResponseDataset& d);

/// All pairwise slack values of the projected system in a fixed (s,t) order;
/// the margin is the clipped maximum of these.
std::vector<double> margin_slacks(const Strategy& s, const ProbeResponseDataset& d);

/// Residual vector of the multi-constraint system at the projected theta
/// (satisfied means <= 0); margin_utility_multi is its clipped negated max.
std::vector<double> multi_afriat_residuals(
    const Strategy& u, const ProbeResponseDataset& d,
    const std::vector<ConstraintBuilder>& constraints,
    double kkt_tol = std::numeric_limits<double>::infinity());

/// Nonnegative least squares on the stationarity residual
/// || grad_u - sum_i lambda_i grad_gi ||; exact active-set enumeration,
/// intended for a handful of constraints.
Vec recover_kkt_multipliers(const Vec& grad_u, const std::vector<Vec>& grad_g,
                            double* residual = nullptr);

}  // namespace cogmask
