#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "cogmask/strategy.hpp"
#include "cogmask/vecmath.hpp"

namespace cogmask {

/// Euclidean projection onto the weighted simplex {b >= 0, alpha'b = 1},
/// alpha > 0 componentwise. Exact sorted-threshold active-set method:
/// b_i = max(0, x_i - tau alpha_i) with tau solving alpha'b = 1.
inline Vec project_weighted_simplex(std::span<const double> x, std::span<const double> alpha) {
  const std::size_t m = x.size();
  if (alpha.size() != m) throw std::invalid_argument("projection: dimension mismatch");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("projection: weights must be positive");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return x[i] / alpha[i] > x[j] / alpha[j]; });

  double num = -1.0, den = 0.0, tau = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = order[k];
    num += alpha[i] * x[i];
    den += alpha[i] * alpha[i];
    const double cand = num / den;
    // the candidate is valid while every selected index stays positive
    if (x[i] / alpha[i] > cand || k == 0) {
      tau = cand;
      active = k + 1;
    }
  }
  (void)active;
  Vec b(m);
  for (std::size_t i = 0; i < m; ++i) b[i] = std::max(0.0, x[i] - tau * alpha[i]);
  // guard against rounding drift on the equality
  const double s = dot(alpha, b);
  if (s > 0.0)
    for (double& v : b) v /= s;
  return b;
}

/// Projection onto {b >= 0, alpha'b <= 1}: clip, then fall back to the
/// simplex face when the budget is violated.
inline Vec project_budget_halfspace(std::span<const double> x, std::span<const double> alpha) {
  Vec c = clamped_nonneg(x);
  if (dot(alpha, c) <= 1.0) return c;
  return project_weighted_simplex(x, alpha);
}

/// Projection onto {b >= 0, ||b||_kappa <= cap}: clip then scale to the
/// boundary. Exact for kappa = 2; a feasibility-preserving retraction for
/// other norms.
inline Vec project_norm_ball_nonneg(std::span<const double> x, double kappa, double cap) {
  Vec c = clamped_nonneg(x);
  double s = 0.0;
  for (double v : c) s += std::pow(v, kappa);
  const double norm = std::pow(s, 1.0 / kappa);
  if (norm <= cap) return c;
  const double f = cap / norm;
  for (double& v : c) v *= f;
  return c;
}

/// Feasibility-preserving retraction onto {b >= 0, g(b) <= level} for
/// monotone increasing g: clip, then shrink radially until feasible.
inline Vec project_monotone_level(std::span<const double> x, const Strategy& g, double level) {
  Vec c = clamped_nonneg(x);
  if (g.value(c) <= level) return c;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g.value(scaled(c, mid)) <= level)
      lo = mid;
    else
      hi = mid;
  }
  return scaled(c, lo);
}

/// Dykstra's alternating projection onto an intersection of convex sets.
/// Converges to the exact Euclidean projection when each projector is exact.
inline Vec project_intersection_dykstra(std::span<const double> x,
                                        const std::vector<std::function<Vec(std::span<const double>)>>& projs,
                                        int max_sweeps = 100, double tol = 1e-12) {
  const std::size_t m = x.size(), n = projs.size();
  Vec z(x.begin(), x.end());
  std::vector<Vec> corr(n, Vec(m, 0.0));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      Vec y = add(z, corr[k]);
      Vec p = projs[k](y);
      for (std::size_t i = 0; i < m; ++i) {
        corr[k][i] = y[i] - p[i];
        moved = std::max(moved, std::abs(p[i] - z[i]));
        z[i] = p[i];
      }
    }
    if (moved <= tol) break;
  }
  return z;
}

}  // namespace cogmask
