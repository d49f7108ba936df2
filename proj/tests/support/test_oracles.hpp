#pragma once

// Independent brute-force oracles used to pin expected values. These
// reimplement the quantities they check with different algorithms (grid
// scans, exhaustive enumeration, plain ascent) and must not call the
// library's closed-form paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cogmask/dataset.hpp"
#include "cogmask/strategy.hpp"

namespace oracles {

using cogmask::ProbeResponseDataset;
using cogmask::Strategy;
using cogmask::Vec;

inline double odot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Median of componentwise gradient ratios, written independently of the
// library's projection helper.
inline double ratio_median(const Vec& num, const Vec& den) {
  std::vector<double> r;
  for (std::size_t i = 0; i < num.size(); ++i)
    if (std::abs(den[i]) > 1e-12) r.push_back(num[i] / den[i]);
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  return n % 2 ? r[n / 2] : 0.5 * (r[n / 2 - 1] + r[n / 2]);
}

// All pairwise system rows for a strategy on a dataset, recomputed from
// scratch (satisfied means <= 0).
inline std::vector<double> system_rows(const Strategy& s, const ProbeResponseDataset& d) {
  const std::size_t K = d.horizon();
  const double dir = d.kind == cogmask::DatasetKind::ConstraintKnown ? 1.0 : -1.0;
  std::vector<double> values(K), mult(K);
  std::vector<Vec> kv(K);
  for (std::size_t t = 0; t < K; ++t) {
    const Strategy known = d.known_function(t);
    values[t] = s.value(d.responses[t]);
    mult[t] = ratio_median(s.gradient(d.responses[t]), known.gradient(d.responses[t]));
  }
  std::vector<double> rows;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t t = 0; t < K; ++t) {
      if (a == t) continue;
      const Strategy known = d.known_function(t);
      const double data_term = known.value(d.responses[a]) - known.value(d.responses[t]);
      rows.push_back(dir * (values[a] - values[t] - mult[t] * data_term));
    }
  return rows;
}

// Brute-force margin: scan epsilon on a uniform grid until the whole
// projected system flips sign.
inline double margin_grid_scan(const Strategy& s, const ProbeResponseDataset& d,
                               double step = 1e-6, double ceiling = 1e3) {
  const std::vector<double> rows = system_rows(s, d);
  for (double eps = 0.0; eps <= ceiling; eps += step) {
    bool flipped = true;
    for (double r : rows) flipped &= r + eps >= 0.0;
    if (flipped) return eps;
  }
  return ceiling;
}

// Independent constrained maximizer: projected ascent with numeric
// gradients, feasibility restored by rescaling toward the origin, random
// restarts.
inline Vec ascent_max(const std::function<double(const Vec&)>& f,
                      const std::function<bool(const Vec&)>& feasible, std::size_t m,
                      unsigned seed, int restarts = 12, int iters = 4000) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  auto clamp_feasible = [&](Vec x) {
    for (double& v : x) v = std::max(0.0, v);
    double c = 1.0;
    while (!feasible(x) && c > 1e-14) {
      c *= 0.9;
      Vec y = x;
      for (double& v : y) v *= c;
      if (feasible(y)) return y;
    }
    return x;
  };
  Vec best;
  double best_val = -1e300;
  for (int r = 0; r < restarts; ++r) {
    Vec x(m);
    for (double& v : x) v = unif(eng);
    x = clamp_feasible(x);
    double step = 0.1;
    for (int it = 0; it < iters && step > 1e-12; ++it) {
      Vec g(m);
      const double h = 1e-7;
      for (std::size_t i = 0; i < m; ++i) {
        Vec up = x, dn = x;
        up[i] += h;
        dn[i] = std::max(0.0, dn[i] - h);
        g[i] = (f(up) - f(dn)) / (up[i] - dn[i]);
      }
      Vec cand = x;
      for (std::size_t i = 0; i < m; ++i) cand[i] = std::max(0.0, cand[i] + step * g[i]);
      cand = clamp_feasible(cand);
      if (f(cand) > f(x)) {
        x = cand;
        step = std::min(0.5, step * 1.3);
      } else {
        step *= 0.5;
      }
    }
    if (f(x) > best_val) {
      best_val = f(x);
      best = x;
    }
  }
  return best;
}

// Exhaustive vertex check for convex objectives under a unit linear budget.
inline Vec vertex_max(const std::function<double(const Vec&)>& f, const Vec& alpha) {
  const std::size_t m = alpha.size();
  Vec best(m, 0.0);
  double best_val = f(best);
  for (std::size_t i = 0; i < m; ++i) {
    Vec v(m, 0.0);
    v[i] = 1.0 / alpha[i];
    if (f(v) > best_val) {
      best_val = f(v);
      best = v;
    }
  }
  return best;
}

}  // namespace oracles
