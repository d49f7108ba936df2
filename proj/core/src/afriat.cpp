#include "cogmask/afriat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cogmask {
namespace {

constexpr double kActiveSlack = 1e-12;

double median(Vec v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double data_scale_of(const std::vector<double>& terms) {
  double mx = 0.0;
  for (double g : terms) mx = std::max(mx, std::abs(g));
  return mx > 0.0 ? 1.0 / mx : 1.0;
}

// Data tensor for the multi-constraint system: H[(s*I + i)*K + t] = g_i at
// step s evaluated on response t, as the test uses it (no re-anchoring).
std::vector<double> multi_terms(const ProbeResponseDataset& d,
                                const std::vector<ConstraintBuilder>& constraints) {
  const std::size_t K = d.horizon(), I = constraints.size();
  std::vector<double> H(K * I * K, 0.0);
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t i = 0; i < I; ++i) {
      const Strategy g = constraints[i](s, d);
      for (std::size_t t = 0; t < K; ++t) H[(s * I + i) * K + t] = g.value(d.responses[t]);
    }
  return H;
}

struct MultiLp {
  std::size_t K = 0, I = 0;
  std::vector<double> H;  // scaled data terms
  double scale = 1.0;
};

// lower[t] == I means the selector for step t is free (relaxed sum row);
// otherwise multiplier (t, lower[t]) is floored at kThetaFloor.
LpResult solve_multi_node(const MultiLp& lp, const std::vector<std::size_t>& lower) {
  const std::size_t K = lp.K, I = lp.I;
  const std::size_t ncols = K + K * I;
  std::vector<Vec> rows;
  Vec rhs;
  rows.reserve(K * K);
  auto mult_col = [&](std::size_t t, std::size_t i) { return K + t * I + i; };

  for (std::size_t s = 0; s < K; ++s) {
    for (std::size_t t = 0; t < K; ++t) {
      if (s == t) continue;
      Vec row(ncols, 0.0);
      row[t] += 1.0;
      row[s] -= 1.0;
      double shift = 0.0;  // contribution of the variable lower bounds
      for (std::size_t i = 0; i < I; ++i) {
        const double h = lp.H[(s * I + i) * K + t];
        row[mult_col(s, i)] = -h;
        if (lower[s] == i) shift += kThetaFloor * h;
      }
      rows.push_back(std::move(row));
      rhs.push_back(kFeasTol + shift);
    }
  }
  for (std::size_t t = 0; t < K; ++t) {
    if (lower[t] != I) continue;
    Vec row(ncols, 0.0);
    for (std::size_t i = 0; i < I; ++i) row[mult_col(t, i)] = -1.0;
    rows.push_back(std::move(row));
    rhs.push_back(-kThetaFloor);
  }

  LpResult r = feasible_point(ncols, rows, rhs);
  if (r.status == LpStatus::Feasible) {
    // undo the substitution: theta = x + lower bound
    for (std::size_t t = 0; t < K; ++t) r.x[t] += kThetaFloor;
    for (std::size_t t = 0; t < K; ++t)
      if (lower[t] != I) r.x[mult_col(t, lower[t])] += kThetaFloor;
  }
  return r;
}

FeasibilityCertificate make_multi_certificate(const MultiLp& lp, const LpResult& r) {
  FeasibilityCertificate cert;
  cert.horizon = lp.K;
  cert.n_constraints = lp.I;
  cert.data_scale = lp.scale;
  cert.status = SolveStatus::Feasible;
  cert.feasible = true;
  cert.theta = r.x;
  cert.lp_residual = r.residual;
  cert.active_flags.assign(lp.K * lp.I, 0);
  for (std::size_t t = 0; t < lp.K; ++t)
    for (std::size_t i = 0; i < lp.I; ++i)
      cert.active_flags[t * lp.I + i] =
          r.x[lp.K + t * lp.I + i] >= kThetaFloor - kActiveSlack ? 1 : 0;
  return cert;
}

}  // namespace

InequalitySystem build_afriat_system(const ProbeResponseDataset& d) {
  d.validate();
  InequalitySystem sys;
  sys.kind = d.kind;
  sys.horizon = d.horizon();
  sys.trivial = sys.horizon < 2;
  sys.data_terms.assign(sys.horizon * sys.horizon, 0.0);
  if (sys.trivial) return sys;
  for (std::size_t t = 0; t < sys.horizon; ++t) {
    const Strategy known = d.known_function(t);
    const double at_t = known.value(d.responses[t]);
    for (std::size_t s = 0; s < sys.horizon; ++s) {
      if (s == t) continue;
      sys.data_terms[t * sys.horizon + s] = known.value(d.responses[s]) - at_t;
    }
  }
  return sys;
}

std::vector<double> InequalitySystem::residuals(std::span<const double> theta,
                                                double relax) const {
  std::vector<double> r;
  if (trivial) return r;
  const double dir = kind == DatasetKind::ConstraintKnown ? 1.0 : -1.0;
  r.reserve(rows());
  for (std::size_t s = 0; s < horizon; ++s)
    for (std::size_t t = 0; t < horizon; ++t) {
      if (s == t) continue;
      const double g = term(t, s) + dir * relax;
      r.push_back(dir * (theta[s] - theta[t] - theta[horizon + t] * g));
    }
  return r;
}

LpResult solve_system(const InequalitySystem& sys, double relax) {
  const std::size_t K = sys.horizon;
  LpResult trivial_ok;
  trivial_ok.status = LpStatus::Feasible;
  trivial_ok.x.assign(2 * K, kThetaFloor);
  if (sys.trivial) return trivial_ok;

  const double dir = sys.kind == DatasetKind::ConstraintKnown ? 1.0 : -1.0;
  std::vector<double> terms = sys.data_terms;
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t s = 0; s < K; ++s)
      if (s != t) terms[t * K + s] += dir * relax;
  const double c = data_scale_of(terms);
  for (double& g : terms) g *= c;

  std::vector<Vec> rows;
  Vec rhs;
  rows.reserve(K * (K - 1));
  for (std::size_t s = 0; s < K; ++s)
    for (std::size_t t = 0; t < K; ++t) {
      if (s == t) continue;
      Vec row(2 * K, 0.0);
      const double g = terms[t * K + s];
      row[s] = dir;
      row[t] = -dir;
      row[K + t] = -dir * g;
      rows.push_back(std::move(row));
      // theta = x + floor on every entry
      rhs.push_back(kFeasTol + dir * kThetaFloor * g);
    }

  LpResult r = feasible_point(2 * K, rows, rhs);
  if (r.status == LpStatus::Feasible)
    for (double& v : r.x) v += kThetaFloor;
  return r;
}

namespace {

FeasibilityCertificate certify_single(const ProbeResponseDataset& d) {
  const InequalitySystem sys = build_afriat_system(d);
  FeasibilityCertificate cert;
  cert.horizon = sys.horizon;
  cert.trivial = sys.trivial;
  cert.data_scale = sys.trivial ? 1.0 : data_scale_of(sys.data_terms);

  const LpResult r = solve_system(sys);
  switch (r.status) {
    case LpStatus::Feasible:
      cert.status = SolveStatus::Feasible;
      cert.feasible = true;
      cert.theta = r.x;
      cert.lp_residual = r.residual;
      break;
    case LpStatus::Infeasible:
      cert.status = SolveStatus::Infeasible;
      break;
    case LpStatus::IterationLimit:
      cert.status = SolveStatus::SolverError;
      break;
  }
  return cert;
}

}  // namespace

FeasibilityCertificate check_utility_rationalizable(const ProbeResponseDataset& d) {
  if (d.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("check_utility_rationalizable: constraint-known dataset required");
  return certify_single(d);
}

FeasibilityCertificate check_constraint_rationalizable(const ProbeResponseDataset& d) {
  if (d.kind != DatasetKind::UtilityKnown)
    throw std::invalid_argument("check_constraint_rationalizable: utility-known dataset required");
  return certify_single(d);
}

FeasibilityCertificate check_multiconstraint_rationalizable(
    const ProbeResponseDataset& d, const std::vector<ConstraintBuilder>& constraints) {
  d.validate();
  const std::size_t K = d.horizon(), I = constraints.size();
  if (I < 1) throw std::invalid_argument("multi-constraint test needs at least one constraint");

  MultiLp lp;
  lp.K = K;
  lp.I = I;
  lp.H = multi_terms(d, constraints);
  lp.scale = data_scale_of(lp.H);
  for (double& h : lp.H) h *= lp.scale;

  if (K < 2) {
    std::vector<std::size_t> lower(K, 0);
    const LpResult r = solve_multi_node(lp, lower);
    FeasibilityCertificate cert = make_multi_certificate(lp, r);
    cert.trivial = true;
    return cert;
  }

  // Branch and bound over the per-step selectors.
  constexpr std::size_t kNodeBudget = 100000;
  std::size_t nodes = 0;
  std::vector<std::vector<std::size_t>> stack{std::vector<std::size_t>(K, I)};
  bool solver_error = false;
  while (!stack.empty()) {
    if (++nodes > kNodeBudget) {
      solver_error = true;
      break;
    }
    std::vector<std::size_t> lower = std::move(stack.back());
    stack.pop_back();
    const LpResult r = solve_multi_node(lp, lower);
    if (r.status == LpStatus::IterationLimit) {
      solver_error = true;
      break;
    }
    if (r.status == LpStatus::Infeasible) continue;

    std::size_t fractional = K;
    for (std::size_t t = 0; t < K && fractional == K; ++t) {
      if (lower[t] != I) continue;
      bool any_active = false;
      for (std::size_t i = 0; i < I; ++i)
        any_active |= r.x[K + t * I + i] >= kThetaFloor - kActiveSlack;
      if (!any_active) fractional = t;
    }
    if (fractional == K) return make_multi_certificate(lp, r);
    for (std::size_t i = I; i-- > 0;) {
      auto child = lower;
      child[fractional] = i;
      stack.push_back(std::move(child));
    }
  }

  FeasibilityCertificate cert;
  cert.horizon = K;
  cert.n_constraints = I;
  cert.data_scale = lp.scale;
  cert.status = solver_error ? SolveStatus::SolverError : SolveStatus::Infeasible;
  return cert;
}

FeasibilityCertificate check_multiconstraint_enumeration(
    const ProbeResponseDataset& d, const std::vector<ConstraintBuilder>& constraints) {
  d.validate();
  const std::size_t K = d.horizon(), I = constraints.size();
  if (I < 1) throw std::invalid_argument("multi-constraint test needs at least one constraint");
  if (K > 6 || I > 3)
    throw std::invalid_argument("enumeration oracle limited to K <= 6, I <= 3");

  MultiLp lp;
  lp.K = K;
  lp.I = I;
  lp.H = multi_terms(d, constraints);
  lp.scale = data_scale_of(lp.H);
  for (double& h : lp.H) h *= lp.scale;

  std::size_t total = 1;
  for (std::size_t t = 0; t < K; ++t) total *= I;
  bool solver_error = false;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<std::size_t> lower(K);
    std::size_t c = code;
    for (std::size_t t = 0; t < K; ++t) {
      lower[t] = c % I;
      c /= I;
    }
    const LpResult r = solve_multi_node(lp, lower);
    if (r.status == LpStatus::Feasible) {
      FeasibilityCertificate cert = make_multi_certificate(lp, r);
      cert.trivial = K < 2;
      return cert;
    }
    solver_error |= r.status == LpStatus::IterationLimit;
  }
  FeasibilityCertificate cert;
  cert.horizon = K;
  cert.n_constraints = I;
  cert.data_scale = lp.scale;
  cert.status = solver_error ? SolveStatus::SolverError : SolveStatus::Infeasible;
  return cert;
}

double PiecewiseStrategy::value(std::span<const double> x) const {
  double best = 0.0;
  bool first = true;
  for (const Piece& p : pieces) {
    double v = p.offset;
    for (std::size_t i = 0; i < p.anchors.size(); ++i)
      v += p.slopes[i] * (p.anchors[i].value(x) - p.anchor_values[i]);
    if (first)
      best = v;
    else
      best = combiner == Combiner::Min ? std::min(best, v) : std::max(best, v);
    first = false;
  }
  return best;
}

Strategy PiecewiseStrategy::as_strategy(StrategyRole role) const {
  PiecewiseStrategy copy = *this;
  return Strategy::custom("piecewise-reconstruction", role,
                          [copy](std::span<const double> x) { return copy.value(x); });
}

PiecewiseStrategy reconstruct_strategy(const FeasibilityCertificate& cert,
                                       const ProbeResponseDataset& d) {
  if (!cert.feasible) throw std::invalid_argument("reconstruct_strategy: infeasible certificate");
  if (cert.n_constraints != 1)
    throw std::invalid_argument("reconstruct_strategy: multi-constraint overload required");
  const std::size_t K = d.horizon();
  PiecewiseStrategy ps;
  ps.combiner = d.kind == DatasetKind::ConstraintKnown ? PiecewiseStrategy::Combiner::Min
                                                       : PiecewiseStrategy::Combiner::Max;
  ps.pieces.reserve(K);
  for (std::size_t t = 0; t < K; ++t) {
    PiecewiseStrategy::Piece p;
    p.offset = cert.theta[t];
    p.slopes = {cert.theta[K + t] * cert.data_scale};
    p.anchors = {d.known_function(t)};
    p.anchor_values = {p.anchors[0].value(d.responses[t])};
    p.anchor_response = d.responses[t];
    ps.pieces.push_back(std::move(p));
  }
  return ps;
}

PiecewiseStrategy reconstruct_strategy(const FeasibilityCertificate& cert,
                                       const ProbeResponseDataset& d,
                                       const std::vector<ConstraintBuilder>& constraints) {
  if (!cert.feasible) throw std::invalid_argument("reconstruct_strategy: infeasible certificate");
  const std::size_t K = d.horizon(), I = constraints.size();
  if (cert.n_constraints != I)
    throw std::invalid_argument("reconstruct_strategy: constraint count mismatch");
  PiecewiseStrategy ps;
  ps.combiner = PiecewiseStrategy::Combiner::Min;
  ps.pieces.reserve(K);
  for (std::size_t t = 0; t < K; ++t) {
    PiecewiseStrategy::Piece p;
    p.offset = cert.theta[t];
    p.anchor_response = d.responses[t];
    for (std::size_t i = 0; i < I; ++i) {
      p.slopes.push_back(cert.theta[K + t * I + i] * cert.data_scale);
      p.anchors.push_back(constraints[i](t, d));
      p.anchor_values.push_back(p.anchors[i].value(d.responses[t]));
    }
    ps.pieces.push_back(std::move(p));
  }
  return ps;
}

ThetaProjection project_strategy(const Strategy& s, const ProbeResponseDataset& d) {
  d.validate();
  const std::size_t K = d.horizon();
  ThetaProjection proj;
  proj.theta.assign(2 * K, 0.0);
  for (std::size_t t = 0; t < K; ++t) {
    proj.theta[t] = s.value(d.responses[t]);
    const Vec num = s.gradient(d.responses[t]);
    const Vec den = d.known_function(t).gradient(d.responses[t]);
    Vec ratios;
    for (std::size_t i = 0; i < d.m; ++i)
      if (std::abs(den[i]) > 1e-12) ratios.push_back(num[i] / den[i]);
    if (ratios.empty())
      throw std::invalid_argument("project_strategy: zero known-side gradient at step " +
                                  std::to_string(t));
    proj.theta[K + t] = median(std::move(ratios));
    if (proj.theta[K + t] < kThetaFloor) proj.degenerate = true;
  }
  return proj;
}

bool relative_optimality_check(const Strategy& s, const ProbeResponseDataset& d, double tol) {
  d.validate();
  const std::size_t K = d.horizon();
  Vec tested(K);
  for (std::size_t t = 0; t < K; ++t) tested[t] = s.value(d.responses[t]);
  for (std::size_t t = 0; t < K; ++t) {
    const Strategy known = d.known_function(t);
    const double level_t = known.value(d.responses[t]);
    for (std::size_t r = 0; r < K; ++r) {
      if (r == t) continue;
      if (d.kind == DatasetKind::ConstraintKnown) {
        // response r affordable at step t's budget must not beat step t
        if (known.value(d.responses[r]) <= level_t + 1e-12 && tested[t] < tested[r] - tol)
          return false;
      } else {
        // response r within step t's constraint level must not beat step t
        if (tested[r] <= tested[t] + 1e-12 &&
            known.value(d.responses[t]) < known.value(d.responses[r]) - tol)
          return false;
      }
    }
  }
  return true;
}

}  // namespace cogmask
