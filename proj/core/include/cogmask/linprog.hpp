#pragma once

#include <cstddef>
#include <vector>

#include "cogmask/vecmath.hpp"

namespace cogmask {

enum class LpStatus { Feasible, Infeasible, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vec x;             // a feasible point (a phase-1 vertex) when status == Feasible
  int iterations = 0;
  double residual = 0.0;  // max row violation at x
};

/// Finds x >= 0 with rows[i].x <= rhs[i] for all i, or proves none exists.
///
/// Dense phase-1 simplex with Bland's rule. Sized for the small dense
/// systems this library produces (hundreds to a few thousand rows); rows
/// with nonnegative rhs start with their slack basic, the rest get one
/// artificial each.
LpResult feasible_point(std::size_t ncols, const std::vector<Vec>& rows, const Vec& rhs,
                        int max_iter = 0);

}  // namespace cogmask
