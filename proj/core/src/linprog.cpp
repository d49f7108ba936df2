#include "cogmask/linprog.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cogmask {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

}  // namespace

LpResult feasible_point(std::size_t ncols, const std::vector<Vec>& rows, const Vec& rhs,
                        int max_iter) {
  const std::size_t m = rows.size();
  if (rhs.size() != m) throw std::invalid_argument("feasible_point: rhs size mismatch");

  LpResult out;
  if (m == 0) {
    out.status = LpStatus::Feasible;
    out.x.assign(ncols, 0.0);
    return out;
  }

  // Equilibrate rows to unit max magnitude; mixed scales otherwise force
  // tiny pivots that corrupt the tableau.
  std::vector<double> row_scale(m, 1.0);
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].size() != ncols) throw std::invalid_argument("feasible_point: row size mismatch");
    double mx = std::abs(rhs[i]);
    for (double v : rows[i]) mx = std::max(mx, std::abs(v));
    row_scale[i] = mx > 0.0 ? 1.0 / mx : 1.0;
    if (rhs[i] < 0.0) ++n_art;
  }

  const std::size_t total = ncols + m + n_art;  // structural, slack, artificial
  const std::size_t width = total + 1;          // + rhs column
  std::vector<double> tab((m + 1) * width, 0.0);
  auto T = [&](std::size_t r, std::size_t c) -> double& { return tab[r * width + c]; };
  std::vector<std::size_t> basis(m);

  std::size_t art = ncols + m;
  for (std::size_t i = 0; i < m; ++i) {
    const double sgn = (rhs[i] < 0.0 ? -1.0 : 1.0) * row_scale[i];
    for (std::size_t j = 0; j < ncols; ++j) T(i, j) = sgn * rows[i][j];
    T(i, ncols + i) = sgn;  // slack
    T(i, total) = sgn * rhs[i];
    if (rhs[i] < 0.0) {
      T(i, art) = 1.0;
      basis[i] = art++;
    } else {
      basis[i] = ncols + i;
    }
  }

  // Phase-1 objective row: minimize the artificial sum, expressed in
  // nonbasic variables by folding in every artificial-carrying row.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < ncols + m) continue;
    for (std::size_t c = 0; c <= total; ++c) T(m, c) -= T(i, c);
    T(m, basis[i]) = 0.0;
  }

  if (max_iter <= 0) max_iter = static_cast<int>(400 * (m + ncols) + 4000);
  const int bland_after = static_cast<int>(40 * (m + ncols) + 400);

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // Dantzig rule for speed, Bland's rule beyond the stall horizon for
    // guaranteed termination.
    const bool bland = iter >= bland_after;
    std::size_t enter = total;
    double best_cost = -kCostTol;
    for (std::size_t j = 0; j < total; ++j) {
      const double c = T(m, j);
      if (c < best_cost) {
        enter = j;
        if (bland) break;
        best_cost = c;
      }
    }
    if (enter == total) break;  // optimal

    // Ratio test; among near-ties prefer the numerically largest pivot.
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_piv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = T(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = T(i, total) / a;
      const bool better =
          ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 &&
           (bland ? (leave == m || basis[i] < basis[leave]) : a > best_piv));
      if (better) {
        best_ratio = ratio;
        best_piv = a;
        leave = i;
      }
    }
    if (leave == m) {
      // fall back to any positive pivot before declaring a stall
      for (std::size_t i = 0; i < m; ++i) {
        const double a = T(i, enter);
        if (a > 1e-13 && (leave == m || T(i, total) / a < best_ratio)) {
          best_ratio = T(i, total) / a;
          leave = i;
        }
      }
      if (leave == m) break;  // column nonpositive: phase 1 cannot descend here
    }

    const double piv = T(leave, enter);
    const double inv = 1.0 / piv;
    for (std::size_t c = 0; c <= total; ++c) T(leave, c) *= inv;
    T(leave, enter) = 1.0;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = T(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= total; ++c) T(r, c) -= f * T(leave, c);
      T(r, enter) = 0.0;
    }
    basis[leave] = enter;
  }

  out.iterations = iter;
  if (iter >= max_iter) {
    out.status = LpStatus::IterationLimit;
    return out;
  }

  const double objective = -T(m, total);  // artificial sum at the final basis
  out.x.assign(ncols, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < ncols) out.x[basis[i]] = std::max(0.0, T(i, total));

  double viol = 0.0, viol_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    viol = std::max(viol, (dot(rows[i], out.x) - rhs[i]) * row_scale[i]);
    viol_scale = std::max(viol_scale, std::abs(rhs[i]) * row_scale[i]);
  }
  out.residual = std::max(0.0, viol);

  if (objective <= 1e-9 && out.residual <= 1e-7 * viol_scale) {
    out.status = LpStatus::Feasible;
  } else {
    out.status = LpStatus::Infeasible;
    out.x.clear();
  }
  return out;
}

}  // namespace cogmask
