#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cogmask/dataset.hpp"
#include "cogmask/linprog.hpp"
#include "cogmask/strategy.hpp"

namespace cogmask {

/// Strict-positivity floor for feasible theta entries. Open constraints are
/// not LP-representable, so theta > 0 is enforced as theta >= kThetaFloor.
inline constexpr double kThetaFloor = 1e-6;

/// Row cushion for the normalized systems. Kept at zero: any slack here is
/// amplified by floor-level multipliers and breaks the reconstruction's
/// relative optimality; the numeric tolerance lives in the phase-1
/// feasibility threshold instead.
inline constexpr double kFeasTol = 0.0;

/// Pairwise rationality inequalities for one dataset.
///
/// With data terms G(t,s) = g_t(response_s) - g_t(response_t), the system is
///   theta_s - theta_t - theta_{K+t} G(t,s) <= 0  for all s != t
/// over theta in R_+^{2K}; utility-known datasets use the per-step utilities
/// as g_t and reverse the inequality direction (>= 0).
struct InequalitySystem {
  DatasetKind kind = DatasetKind::ConstraintKnown;
  std::size_t horizon = 0;
  bool trivial = false;             // K == 1: no pairwise inequalities exist
  std::vector<double> data_terms;   // row-major K x K, diagonal zero

  double term(std::size_t t, std::size_t s) const { return data_terms[t * horizon + s]; }
  std::size_t rows() const { return trivial ? 0 : horizon * (horizon - 1); }

  /// Residuals of the system at theta, one per ordered pair (s, t), in the
  /// satisfied-means-<=0 convention (utility-known rows are negated).
  /// `relax` shifts every data term (+relax for constraint-known data,
  /// -relax for utility-known data).
  std::vector<double> residuals(std::span<const double> theta, double relax = 0.0) const;
};

InequalitySystem build_afriat_system(const ProbeResponseDataset& d);

/// Feasibility of the relaxed system with the positivity floor, via the
/// dense LP backend. Data terms are normalized to unit max magnitude so the
/// verdict is stable under joint unit rescaling.
LpResult solve_system(const InequalitySystem& sys, double relax = 0.0);

enum class SolveStatus { Feasible, Infeasible, SolverError };

struct FeasibilityCertificate {
  SolveStatus status = SolveStatus::Infeasible;
  bool feasible = false;
  Vec theta;                         // values[0..K), then multiplier block(s)
  std::size_t horizon = 0;
  std::size_t n_constraints = 1;     // I, multi-constraint tests only
  std::vector<std::uint8_t> active_flags;  // K x I, multi only
  double lp_residual = 0.0;
  double data_scale = 1.0;           // multiplier entries solve the scaled system
  bool trivial = false;              // K == 1 convention
};

FeasibilityCertificate check_utility_rationalizable(const ProbeResponseDataset& d);
FeasibilityCertificate check_constraint_rationalizable(const ProbeResponseDataset& d);

/// Builds the i-th constraint at step t, e.g. the linear budget from the
/// probe or a norm cap from the budget level.
using ConstraintBuilder = std::function<Strategy(std::size_t t, const ProbeResponseDataset& d)>;

/// Mixed-integer feasibility test for multiple constraints: real part is the
/// pairwise system over theta in R^{(1+I)K}, binary part selects at least one
/// multiplier >= kThetaFloor per step. Solved by branch and bound on the
/// selectors with the LP as relaxation.
FeasibilityCertificate check_multiconstraint_rationalizable(
    const ProbeResponseDataset& d, const std::vector<ConstraintBuilder>& constraints);

/// Exhaustive oracle over per-step active-constraint assignments (I^K LPs).
/// Intended for K <= 6, I <= 3; throws beyond that.
FeasibilityCertificate check_multiconstraint_enumeration(
    const ProbeResponseDataset& d, const std::vector<ConstraintBuilder>& constraints);

/// Min-of-pieces (utility) or max-of-pieces (constraint) reconstruction from
/// a feasible certificate.
struct PiecewiseStrategy {
  enum class Combiner { Min, Max };
  struct Piece {
    double offset = 0.0;
    Vec slopes;                      // one per constraint, single case has one
    std::vector<Strategy> anchors;   // anchor functions g_t / u_t (or g_i at t)
    Vec anchor_values;               // anchors evaluated at the anchor response
    Vec anchor_response;
  };
  Combiner combiner = Combiner::Min;
  std::vector<Piece> pieces;

  double value(std::span<const double> x) const;
  Strategy as_strategy(StrategyRole role) const;
};

PiecewiseStrategy reconstruct_strategy(const FeasibilityCertificate& cert,
                                       const ProbeResponseDataset& d);
PiecewiseStrategy reconstruct_strategy(const FeasibilityCertificate& cert,
                                       const ProbeResponseDataset& d,
                                       const std::vector<ConstraintBuilder>& constraints);

/// Finite-dimensional projection of a strategy onto the dataset: values at
/// the responses, then per-step multipliers as the median of componentwise
/// gradient ratios (exact at KKT points where all ratios coincide).
struct ThetaProjection {
  Vec theta;        // 2K
  bool degenerate = false;  // some multiplier under the positivity floor
};

ThetaProjection project_strategy(const Strategy& s, const ProbeResponseDataset& d);

/// Pairwise optimality of s on the dataset: whenever response_s is affordable
/// at step t's known function level, step t's value must not lose by more
/// than tol.
bool relative_optimality_check(const Strategy& s, const ProbeResponseDataset& d,
                               double tol = 1e-6);

}  // namespace cogmask
