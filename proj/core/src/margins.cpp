#include "cogmask/margins.hpp"

#include <cmath>
#include <stdexcept>

namespace cogmask {
namespace {

// Solves the |S| x |S| normal equations by Gaussian elimination with
// partial pivoting; sized for a handful of constraints.
bool solve_dense(std::vector<Vec>& a, Vec& b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    if (std::abs(a[piv][k]) < 1e-14) return false;
    std::swap(a[piv], a[k]);
    std::swap(b[piv], b[k]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t c = k + 1; c < n; ++c) b[k] -= a[k][c] * b[c];
    b[k] /= a[k][k];
  }
  return true;
}

MarginResult margin_single(const Strategy& s, const ProbeResponseDataset& d) {
  const ThetaProjection proj = project_strategy(s, d);
  const InequalitySystem sys = build_afriat_system(d);
  MarginResult out;
  out.theta_used = proj.theta;
  if (sys.trivial) return out;

  const std::size_t K = sys.horizon;
  const double dir = d.kind == DatasetKind::ConstraintKnown ? 1.0 : -1.0;
  for (std::size_t s_idx = 0; s_idx < K; ++s_idx)
    for (std::size_t t = 0; t < K; ++t) {
      if (s_idx == t) continue;
      const double row =
          proj.theta[s_idx] - proj.theta[t] - proj.theta[K + t] * sys.term(t, s_idx);
      const double slack = -dir * row;  // relaxation needed by this pair
      if (slack > out.margin) {
        out.margin = slack;
        out.binding_s = s_idx;
        out.binding_t = t;
      }
    }
  return out;
}

}  // namespace

MarginResult margin_utility(const Strategy& u, const ProbeResponseDataset& d) {
  if (d.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("margin_utility: constraint-known dataset required");
  return margin_single(u, d);
}

MarginResult margin_constraint(const Strategy& g, const ProbeResponseDataset& d) {
  if (d.kind != DatasetKind::UtilityKnown)
    throw std::invalid_argument("margin_constraint: utility-known dataset required");
  return margin_single(g, d);
}

Vec recover_kkt_multipliers(const Vec& grad_u, const std::vector<Vec>& grad_g,
                            double* residual) {
  const std::size_t I = grad_g.size(), m = grad_u.size();
  if (I > 20) throw std::invalid_argument("recover_kkt_multipliers: too many constraints");

  Vec best(I, 0.0);
  double best_res = norm2(grad_u);  // all multipliers zero
  for (std::size_t mask = 1; mask < (1u << I); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < I; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const std::size_t n = idx.size();
    std::vector<Vec> gram(n, Vec(n, 0.0));
    Vec rhs(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      rhs[a] = dot(grad_g[idx[a]], grad_u);
      for (std::size_t b = 0; b < n; ++b) gram[a][b] = dot(grad_g[idx[a]], grad_g[idx[b]]);
    }
    if (!solve_dense(gram, rhs)) continue;
    bool nonneg = true;
    for (double v : rhs) nonneg &= v >= 0.0;
    if (!nonneg) continue;
    Vec cand(I, 0.0);
    for (std::size_t a = 0; a < n; ++a) cand[idx[a]] = rhs[a];
    Vec r = grad_u;
    for (std::size_t i = 0; i < I; ++i) axpy(-cand[i], grad_g[i], r);
    const double res = norm2(r);
    if (res < best_res) {
      best_res = res;
      best = std::move(cand);
    }
  }
  if (residual) *residual = best_res;
  return best;
}

namespace {

// theta = (u values, per-step multiplier blocks); throws when stationarity
// is not reproduced within kkt_tol.
Vec multi_projection(const Strategy& u, const ProbeResponseDataset& d,
                     const std::vector<ConstraintBuilder>& constraints, double kkt_tol) {
  const std::size_t K = d.horizon(), I = constraints.size();
  Vec theta(K + K * I, 0.0);
  for (std::size_t t = 0; t < K; ++t) {
    theta[t] = u.value(d.responses[t]);
    const Vec gu = u.gradient(d.responses[t]);
    std::vector<Vec> gg;
    gg.reserve(I);
    for (std::size_t i = 0; i < I; ++i)
      gg.push_back(constraints[i](t, d).gradient(d.responses[t]));
    double res = 0.0;
    const Vec lam = recover_kkt_multipliers(gu, gg, &res);
    if (res > kkt_tol * std::max(1e-12, norm2(gu)))
      throw std::runtime_error(
          "margin_utility_multi: no multipliers reproduce stationarity at step " +
          std::to_string(t));
    for (std::size_t i = 0; i < I; ++i) theta[K + t * I + i] = lam[i];
  }
  return theta;
}

}  // namespace

MarginResult margin_utility_multi(const Strategy& u, const ProbeResponseDataset& d,
                                  const std::vector<ConstraintBuilder>& constraints,
                                  double kkt_tol) {
  if (d.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("margin_utility_multi: constraint-known dataset required");
  const std::size_t K = d.horizon(), I = constraints.size();

  MarginResult out;
  out.theta_used = multi_projection(u, d, constraints, kkt_tol);
  if (K < 2) return out;

  // slack(t,s) = u(b_s) - u(b_t) + sum_i lambda_{s,i} g_i(s-th probe, b_t)
  std::vector<Vec> g_at(K, Vec(K * I, 0.0));
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t i = 0; i < I; ++i) {
      const Strategy g = constraints[i](s, d);
      for (std::size_t t = 0; t < K; ++t) g_at[s][i * K + t] = g.value(d.responses[t]);
    }
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t t = 0; t < K; ++t) {
      if (s == t) continue;
      double slack = out.theta_used[s] - out.theta_used[t];
      for (std::size_t i = 0; i < I; ++i)
        slack += out.theta_used[K + s * I + i] * g_at[s][i * K + t];
      if (slack > out.margin) {
        out.margin = slack;
        out.binding_s = s;
        out.binding_t = t;
      }
    }
  return out;
}

std::vector<double> multi_afriat_residuals(const Strategy& u, const ProbeResponseDataset& d,
                                           const std::vector<ConstraintBuilder>& constraints,
                                           double kkt_tol) {
  const std::size_t K = d.horizon(), I = constraints.size();
  const Vec theta = multi_projection(u, d, constraints, kkt_tol);
  std::vector<double> residuals;
  if (K < 2) return residuals;
  residuals.reserve(K * (K - 1));
  for (std::size_t s = 0; s < K; ++s) {
    std::vector<Strategy> g_s;
    g_s.reserve(I);
    for (std::size_t i = 0; i < I; ++i) g_s.push_back(constraints[i](s, d));
    for (std::size_t t = 0; t < K; ++t) {
      if (s == t) continue;
      double slack = theta[s] - theta[t];
      for (std::size_t i = 0; i < I; ++i)
        slack += theta[K + s * I + i] * g_s[i].value(d.responses[t]);
      residuals.push_back(-slack);
    }
  }
  return residuals;
}

MarginResult margin_generic(const IrlSystemEvaluator& eval, const Strategy& s,
                            const ProbeResponseDataset& d) {
  const std::vector<double> r = eval(s, d);
  MarginResult out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (-r[i] > out.margin) {
      out.margin = -r[i];
      out.binding_s = i;  // flat residual index; pair structure is the evaluator's
      out.binding_t = i;
    }
  }
  return out;
}

std::vector<double> afriat_residuals(const Strategy& s, const ProbeResponseDataset& d) {
  const ThetaProjection proj = project_strategy(s, d);
  return build_afriat_system(d).residuals(proj.theta);
}

std::vector<double> margin_slacks(const Strategy& s, const ProbeResponseDataset& d) {
  std::vector<double> slacks;
  for (double r : afriat_residuals(s, d)) slacks.push_back(-r);
  return slacks;
}

}  // namespace cogmask
