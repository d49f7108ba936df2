#include "cogmask/masking.hpp"

#include <cmath>
#include <limits>

#include "cogmask/projections.hpp"
#include "cogmask/rng.hpp"
#include "cogmask/scenarios.hpp"

namespace cogmask {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hooks {
  std::function<double(std::size_t, std::span<const double>)> util;
  std::function<Vec(std::size_t, std::span<const double>)> util_grad;
  std::function<Vec(std::size_t, std::span<const double>)> project;
  std::function<MarginResult(const Responses&)> margin;
  // Aggregated subgradient over the near-binding pairs; empty means central
  // differences.
  std::function<Responses(const Responses&, const MarginResult&)> margin_grad;
  // Raw residual vector (satisfied means <= 0); lets the difference fallback
  // track a fixed active set instead of straddling the max kink.
  std::function<std::vector<double>(const Responses&)> residual_fn;
  Vec tie_profile;  // constant feasible profile, zero pairwise margin
};

double loss_of(const Hooks& h, const Responses& naive, const Responses& cur) {
  double s = 0.0;
  for (std::size_t t = 0; t < naive.size(); ++t)
    s += h.util(t, naive[t]) - h.util(t, cur[t]);
  return s;
}

Responses numeric_margin_grad(const Hooks& h, const Responses& cur) {
  Responses g(cur.size(), Vec(cur.front().size(), 0.0));
  Responses probe = cur;

  std::vector<std::size_t> active;
  if (h.residual_fn) {
    const std::vector<double> r0 = h.residual_fn(cur);
    double mx = 0.0;
    for (double r : r0) mx = std::max(mx, -r);
    if (mx <= 0.0) return g;
    for (std::size_t j = 0; j < r0.size(); ++j)
      if (-r0[j] >= mx - std::max(1e-12, 1e-6 * mx)) active.push_back(j);
  }
  const auto slack_at = [&](const Responses& x) {
    if (active.empty()) return h.margin(x).margin;
    const std::vector<double> r = h.residual_fn(x);
    double s = 0.0;
    for (std::size_t j : active) s -= r[j];
    return s / static_cast<double>(active.size());
  };

  for (std::size_t t = 0; t < cur.size(); ++t)
    for (std::size_t i = 0; i < cur[t].size(); ++i) {
      const double step = 1e-6 * std::max(1.0, std::abs(cur[t][i]));
      probe[t][i] = cur[t][i] + step;
      const double up = slack_at(probe);
      probe[t][i] = cur[t][i] - step;
      const double dn = slack_at(probe);
      probe[t][i] = cur[t][i];
      g[t][i] = (up - dn) / (2.0 * step);
    }
  return g;
}

struct Candidate {
  bool valid = false;
  double loss = kInf;
  double margin = kInf;
  Responses responses;
  int iterations = 0;
};

void consider(Candidate& best, const Responses& cur, double loss, double margin, double cap,
              double slack, int iters) {
  if (margin <= cap + slack) {
    if (!best.valid || loss < best.loss) {
      best.valid = true;
      best.loss = loss;
      best.margin = margin;
      best.responses = cur;
      best.iterations = iters;
    }
  }
}

Responses blend(const Responses& naive, const Vec& tie, double tau) {
  Responses r = naive;
  for (auto& bt : r)
    for (std::size_t i = 0; i < bt.size(); ++i) bt[i] = (1.0 - tau) * bt[i] + tau * tie[i];
  return r;
}

void track_lowest(Candidate& lowest, const Responses& cur, double margin) {
  if (margin < lowest.margin) {
    lowest.margin = margin;
    lowest.responses = cur;
  }
}

// Blend an arbitrary iterate toward the tie profile until the margin target
// holds (the tie endpoint always does).
Responses restore_cap(const Hooks& h, Responses cand, double target) {
  if (h.margin(cand).margin <= target) return cand;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h.margin(blend(cand, h.tie_profile, mid)).margin <= target)
      hi = mid;
    else
      lo = mid;
  }
  return blend(cand, h.tie_profile, hi);
}

// Feasible-direction polish: utility-ascent steps with the margin cap
// restored by blending toward the tie, accepted on strict loss decrease.
void polish(const Hooks& h, const Responses& naive, Responses cur, double cap,
            const SolverConfig& cfg, Candidate& best, Candidate& lowest) {
  if (h.tie_profile.empty()) return;
  const double start_margin = h.margin(cur).margin;
  if (start_margin > cap + cfg.cap_slack) cur = restore_cap(h, std::move(cur), cap + 0.5 * cfg.cap_slack);
  double cur_loss = loss_of(h, naive, cur);
  {
    const MarginResult mr0 = h.margin(cur);
    consider(best, cur, cur_loss, mr0.margin, cap, cfg.cap_slack, best.iterations);
    track_lowest(lowest, cur, mr0.margin);
  }
  double step = 0.25;
  const double target = cap + 0.5 * cfg.cap_slack;
  const std::size_t K = cur.size(), m = cur.front().size();
  for (int it = 0; it < 2 * cfg.max_iterations; ++it) {
    bool accepted = false;
    double s = step;
    for (int bt = 0; bt < 24 && !accepted; ++bt, s *= 0.5) {
      Responses cand(K);
      for (std::size_t t = 0; t < K; ++t) {
        Vec moved = cur[t];
        axpy(s, h.util_grad(t, cur[t]), moved);  // ascend utility = descend loss
        cand[t] = h.project(t, moved);
      }
      cand = restore_cap(h, std::move(cand), target);
      const double cand_loss = loss_of(h, naive, cand);
      if (cand_loss < cur_loss - 1e-12) {
        const MarginResult mr = h.margin(cand);
        consider(best, cand, cand_loss, mr.margin, cap, cfg.cap_slack, best.iterations + 1);
        track_lowest(lowest, cand, mr.margin);
        cur = std::move(cand);
        cur_loss = cand_loss;
        accepted = true;
        step = std::min(2.0, s * 1.5);
      }
    }
    if (!accepted) break;
  }
}

// Smallest blend toward the tie profile whose margin meets the target.
Responses blend_to_cap(const Hooks& h, const Responses& naive, double target) {
  double lo = 0.0, hi = 1.0;
  bool bracketed = false;
  for (int k = 1; k <= 64; ++k) {
    const double tau = k / 64.0;
    if (h.margin(blend(naive, h.tie_profile, tau)).margin <= target) {
      lo = (k - 1) / 64.0;
      hi = tau;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return blend(naive, h.tie_profile, 1.0);
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h.margin(blend(naive, h.tie_profile, mid)).margin <= target)
      hi = mid;
    else
      lo = mid;
  }
  return blend(naive, h.tie_profile, hi);
}

// Exact-penalty projected gradient with Armijo backtracking. Tracks the best
// cap-satisfying iterate seen anywhere along the run.
Responses descend(const Hooks& h, const Responses& naive, Responses start, double cap,
                  const SolverConfig& cfg, int iter_budget, Candidate& best,
                  Candidate& lowest) {
  Responses cur = std::move(start);
  const std::size_t K = cur.size(), m = cur.front().size();
  double rho = cfg.initial_penalty;
  int iters = 0;

  for (int phase = 0; phase <= cfg.max_penalty_doublings && iters < iter_budget;
       ++phase, rho *= 2.0) {
    double step = 0.25;
    bool numeric_mode = false;
    // run to a stall or the shared budget; the cap check below decides
    // whether the stalled point needs a stiffer penalty
    while (iters < iter_budget) {
      const MarginResult mr = h.margin(cur);
      const double cur_loss = loss_of(h, naive, cur);
      consider(best, cur, cur_loss, mr.margin, cap, cfg.cap_slack, iters);
      track_lowest(lowest, cur, mr.margin);
      const double f0 = cur_loss + rho * std::max(0.0, mr.margin - cap);

      Responses grad(K, Vec(m, 0.0));
      for (std::size_t t = 0; t < K; ++t) {
        const Vec gu = h.util_grad(t, cur[t]);
        for (std::size_t i = 0; i < m; ++i) grad[t][i] = -gu[i];
      }
      if (mr.margin > cap) {
        const Responses mg = (h.margin_grad && !numeric_mode) ? h.margin_grad(cur, mr)
                                                              : numeric_margin_grad(h, cur);
        for (std::size_t t = 0; t < K; ++t)
          for (std::size_t i = 0; i < m; ++i) grad[t][i] += rho * mg[t][i];
      }

      bool accepted = false;
      double s = step;
      for (int bt = 0; bt < 40 && !accepted; ++bt, s *= 0.5) {
        Responses cand(K);
        double sq = 0.0;
        for (std::size_t t = 0; t < K; ++t) {
          Vec moved = cur[t];
          axpy(-s, grad[t], moved);
          cand[t] = h.project(t, moved);
          const Vec d = sub(cand[t], cur[t]);
          sq += dot(d, d);
        }
        if (sq <= 1e-24) break;
        const MarginResult cmr = h.margin(cand);
        const double closs = loss_of(h, naive, cand);
        const double f1 = closs + rho * std::max(0.0, cmr.margin - cap);
        if (f1 <= f0 - 1e-4 * sq / s) {
          consider(best, cand, closs, cmr.margin, cap, cfg.cap_slack, iters + 1);
          track_lowest(lowest, cand, cmr.margin);
          cur = std::move(cand);
          accepted = true;
          step = std::min(4.0, s * 1.5);
        }
      }
      if (!accepted && mr.margin > cap && !h.tie_profile.empty()) {
        // rescue: shrink toward the tie profile, a sure margin reducer
        for (double tau : {0.002, 0.01, 0.05, 0.2}) {
          Responses cand = cur;
          for (std::size_t t = 0; t < K; ++t)
            for (std::size_t i = 0; i < m; ++i)
              cand[t][i] += tau * (h.tie_profile[i] - cand[t][i]);
          const MarginResult cmr = h.margin(cand);
          const double closs = loss_of(h, naive, cand);
          const double f1 = closs + rho * std::max(0.0, cmr.margin - cap);
          if (f1 < f0 - 1e-12) {
            consider(best, cand, closs, cmr.margin, cap, cfg.cap_slack, iters + 1);
            track_lowest(lowest, cand, cmr.margin);
            cur = std::move(cand);
            accepted = true;
            break;
          }
        }
      }
      ++iters;
      if (!accepted) {
        if (h.margin_grad && !numeric_mode && mr.margin > cap) {
          numeric_mode = true;  // retry the phase tail with difference gradients
          continue;
        }
        break;
      }
    }
    if (h.margin(cur).margin <= cap + cfg.cap_slack) break;
  }
  return cur;
}

MaskingReport run_mask(const MaskingProblem& p, const Hooks& h, Responses naive) {
  if (p.eta < 0.0 || p.eta > 1.0)
    throw std::invalid_argument("masking: eta must lie in [0,1]");
  const std::size_t K = naive.size(), m = naive.front().size();

  MaskingReport rep;
  rep.eta = p.eta;
  rep.naive_responses = naive;
  rep.margin_before = h.margin(naive).margin;
  rep.cap = (1.0 - p.eta) * rep.margin_before;
  rep.restarts = p.solver.restarts;

  if (rep.margin_before <= rep.cap + 1e-15) {  // eta == 0 or degenerate margin
    rep.masked_responses = naive;
    rep.margin_after = rep.margin_before;
    rep.loss = 0.0;
    return rep;
  }

  Candidate best;
  Candidate lowest;  // best-margin iterate, kept for the failure report
  lowest.margin = kInf;

  Rng rng = Rng(p.solver.seed).substream(0x6d61736bULL);
  std::vector<Responses> starts;
  starts.push_back(naive);
  starts.push_back(blend_to_cap(h, naive, rep.cap + 0.5 * p.solver.cap_slack));
  while (static_cast<int>(starts.size()) < p.solver.restarts) {
    Responses s(K);
    for (std::size_t t = 0; t < K; ++t) {
      Vec x = naive[t];
      for (std::size_t i = 0; i < m; ++i)
        x[i] *= 1.0 + p.solver.dither * (2.0 * rng.uniform01() - 1.0);
      s[t] = h.project(t, x);
    }
    starts.push_back(std::move(s));
  }
  rep.restarts = static_cast<int>(starts.size());

  // full budget for the naive and tie-blend starts, half for the dithers;
  // difference-driven variants move in smaller accepted steps and get more
  const int scale = h.margin_grad ? 3 : 12;
  const int full_budget = scale * p.solver.max_iterations;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Responses endpoint = descend(h, naive, starts[s], rep.cap, p.solver,
                                 s < 2 ? full_budget : full_budget / 2, best, lowest);
    polish(h, naive, std::move(endpoint), rep.cap, p.solver, best, lowest);
  }
  if (best.valid) polish(h, naive, best.responses, rep.cap, p.solver, best, lowest);

  if (!best.valid) {
    rep.masked_responses = lowest.responses;
    rep.margin_after = lowest.margin;
    rep.loss = loss_of(h, naive, rep.masked_responses);
    rep.penalty_residual = std::max(0.0, rep.margin_after - rep.cap);
    throw MaskingFailure("masking: no restart met the margin cap", rep);
  }

  rep.masked_responses = best.responses;
  rep.margin_after = h.margin(best.responses).margin;
  rep.loss = best.loss;
  rep.iterations = best.iterations;
  rep.penalty_residual = std::max(0.0, rep.margin_after - rep.cap);
  return rep;
}

// --- per-variant hook assembly -------------------------------------------

ProbeResponseDataset scratch_dataset(const ProbeResponseDataset& base) {
  ProbeResponseDataset d = base;
  d.noisy = true;  // skip sign/budget revalidation on solver iterates
  return d;
}

// Iterates with several exactly-zero components make the Cobb-Douglas
// gradient vanish and the ratio projection undefined; a tiny floor keeps
// the margin defined while staying inside the feasibility tolerance.
Vec floored(Vec v, double lo = 1e-10) {
  for (double& x : v) x = std::max(x, lo);
  return v;
}

std::function<Vec(std::span<const double>)> level_projector(const Strategy& g, double level) {
  if (g.family() == Strategy::Family::LinearBudget && level == 0.0) {
    Vec w = g.params();  // w'x - 1 <= 0
    return [w](std::span<const double> x) { return project_budget_halfspace(x, w); };
  }
  if (g.family() == Strategy::Family::KNorm) {
    const double kappa = g.scalar_param();
    const double cap = level - g.offset();  // ||x|| + offset <= level
    return [kappa, cap](std::span<const double> x) {
      return project_norm_ball_nonneg(x, kappa, cap);
    };
  }
  return [g, level](std::span<const double> x) { return project_monotone_level(x, g, level); };
}

Hooks utility_hooks(const MaskingProblem& p) {
  const Strategy u = p.radar_strategy;
  auto base = std::make_shared<ProbeResponseDataset>(scratch_dataset(p.data));
  Hooks h;
  h.util = [u](std::size_t, std::span<const double> b) { return u.value(b); };
  h.util_grad = [u](std::size_t, std::span<const double> b) { return u.gradient(b); };
  h.project = [base](std::size_t t, std::span<const double> x) {
    return project_budget_halfspace(x, base->probes[t]);
  };
  h.margin = [u, base](const Responses& r) {
    base->responses = r;
    return margin_utility(u, *base);
  };
  h.margin_grad = [u, base](const Responses& r, const MarginResult& mr) {
    const std::size_t K = r.size(), m = r.front().size();
    Responses g(K, Vec(m, 0.0));
    if (mr.margin <= 0.0) return g;
    const double band = mr.margin - std::max(1e-12, 1e-6 * mr.margin);
    std::vector<std::pair<std::size_t, std::size_t>> active;
    for (std::size_t s = 0; s < K; ++s)
      for (std::size_t t = 0; t < K; ++t) {
        if (s == t) continue;
        const double slack = mr.theta_used[t] - mr.theta_used[s] +
                             mr.theta_used[K + t] * dot(base->probes[t], sub(r[s], r[t]));
        if (slack >= band) active.emplace_back(s, t);
      }
    if (active.empty()) active.emplace_back(mr.binding_s, mr.binding_t);
    const double w = 1.0 / static_cast<double>(active.size());
    for (const auto& [s, t] : active) {
      const double lam = mr.theta_used[K + t];
      const Vec& at = base->probes[t];
      const Vec gs = u.gradient(r[s]), gt = u.gradient(r[t]);
      for (std::size_t i = 0; i < m; ++i) {
        g[s][i] += w * (-gs[i] + lam * at[i]);
        g[t][i] += w * (gt[i] - lam * at[i]);
      }
    }
    return g;
  };
  return h;
}

Vec utility_tie_profile(const ProbeResponseDataset& d, const Responses& naive) {
  const std::size_t m = d.m;
  Vec w(m, 1e-9);
  for (const Vec& b : naive) axpy(1.0 / naive.size(), b, w);
  double worst = 0.0;
  for (const Vec& a : d.probes) worst = std::max(worst, dot(a, w));
  return worst > 0.0 ? scaled(w, 1.0 / worst) : w;
}

Hooks constraint_hooks(const MaskingProblem& p, const std::vector<Strategy>& knowns) {
  const Strategy g = p.radar_strategy;
  auto base = std::make_shared<ProbeResponseDataset>(scratch_dataset(p.data));
  Hooks h;
  h.util = [knowns](std::size_t t, std::span<const double> b) { return knowns[t].value(b); };
  h.util_grad = [knowns](std::size_t t, std::span<const double> b) {
    return knowns[t].gradient(b);
  };
  if (g.family() == Strategy::Family::KNorm) {
    const double kappa = g.scalar_param();
    h.project = [base, kappa](std::size_t t, std::span<const double> x) {
      return floored(project_norm_ball_nonneg(x, kappa, base->budgets[t]));
    };
  } else {
    h.project = [base, g](std::size_t t, std::span<const double> x) {
      return floored(project_monotone_level(x, g, base->budgets[t]));
    };
  }
  h.margin = [g, base](const Responses& r) {
    base->responses = r;
    return margin_constraint(g, *base);
  };
  h.margin_grad = [g, knowns, base](const Responses& r, const MarginResult& mr) {
    const std::size_t K = r.size(), m = r.front().size();
    Responses out(K, Vec(m, 0.0));
    if (mr.margin <= 0.0) return out;
    const double band = mr.margin - std::max(1e-12, 1e-6 * mr.margin);
    std::vector<std::pair<std::size_t, std::size_t>> active;
    for (std::size_t s = 0; s < K; ++s)
      for (std::size_t t = 0; t < K; ++t) {
        if (s == t) continue;
        const double slack =
            mr.theta_used[s] - mr.theta_used[t] -
            mr.theta_used[K + t] * (knowns[t].value(r[s]) - knowns[t].value(r[t]));
        if (slack >= band) active.emplace_back(s, t);
      }
    if (active.empty()) active.emplace_back(mr.binding_s, mr.binding_t);
    const double w = 1.0 / static_cast<double>(active.size());
    for (const auto& [s, t] : active) {
      const double ratio = mr.theta_used[K + t];
      const Vec ggs = g.gradient(r[s]), ggt = g.gradient(r[t]);
      const Vec gus = knowns[t].gradient(r[s]), gut = knowns[t].gradient(r[t]);
      for (std::size_t i = 0; i < m; ++i) {
        out[s][i] += w * (ggs[i] - ratio * gus[i]);
        out[t][i] += w * (-ggt[i] + ratio * gut[i]);
      }
    }
    return out;
  };
  return h;
}

Vec constraint_tie_profile(const MaskingProblem& p, const Responses& naive) {
  const std::size_t m = p.data.m;
  Vec w(m, 1e-9);
  for (const Vec& b : naive) axpy(1.0 / naive.size(), b, w);
  double level = kInf;
  for (double b : p.data.budgets) level = std::min(level, b);
  return floored(project_monotone_level(w, p.radar_strategy, level));
}

Hooks multi_hooks(const MaskingProblem& p, const std::vector<ConstraintBuilder>& constraints) {
  const Strategy u = p.radar_strategy;
  auto base = std::make_shared<ProbeResponseDataset>(scratch_dataset(p.data));
  const std::size_t K = p.data.horizon(), I = constraints.size();

  std::vector<std::vector<std::function<Vec(std::span<const double>)>>> projs(K);
  std::vector<std::vector<Strategy>> gs(K);
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t i = 0; i < I; ++i) {
      Strategy git = constraints[i](t, p.data);
      projs[t].push_back(level_projector(git, 0.0));
      gs[t].push_back(std::move(git));
    }

  Hooks h;
  h.util = [u](std::size_t, std::span<const double> b) { return u.value(b); };
  h.util_grad = [u](std::size_t, std::span<const double> b) { return u.gradient(b); };
  h.project = [projs](std::size_t t, std::span<const double> x) {
    if (projs[t].size() == 1) return projs[t][0](x);
    return project_intersection_dykstra(x, projs[t]);
  };
  h.margin = [u, base, constraints](const Responses& r) {
    base->responses = r;
    return margin_utility_multi(u, *base, constraints, kInf);
  };
  h.residual_fn = [u, base, constraints](const Responses& r) {
    base->responses = r;
    return multi_afriat_residuals(u, *base, constraints);
  };
  h.margin_grad = [u, gs, K, I](const Responses& r, const MarginResult& mr) {
    const std::size_t m = r.front().size();
    Responses out(K, Vec(m, 0.0));
    if (mr.margin <= 0.0) return out;
    const double band = mr.margin - std::max(1e-12, 1e-6 * mr.margin);
    std::vector<std::pair<std::size_t, std::size_t>> active;
    for (std::size_t s = 0; s < K; ++s)
      for (std::size_t t = 0; t < K; ++t) {
        if (s == t) continue;
        double slack = mr.theta_used[s] - mr.theta_used[t];
        for (std::size_t i = 0; i < I; ++i)
          slack += mr.theta_used[K + s * I + i] * gs[s][i].value(r[t]);
        if (slack >= band) active.emplace_back(s, t);
      }
    if (active.empty()) active.emplace_back(mr.binding_s, mr.binding_t);
    const double w = 1.0 / static_cast<double>(active.size());
    for (const auto& [s, t] : active) {
      const Vec gus = u.gradient(r[s]), gut = u.gradient(r[t]);
      for (std::size_t j = 0; j < m; ++j) {
        out[s][j] += w * gus[j];
        out[t][j] -= w * gut[j];
      }
      for (std::size_t i = 0; i < I; ++i) {
        const double lam = mr.theta_used[K + s * I + i];
        if (lam == 0.0) continue;
        const Vec gg = gs[s][i].gradient(r[t]);
        for (std::size_t j = 0; j < m; ++j) out[t][j] += w * lam * gg[j];
      }
    }
    return out;
  };
  return h;
}

Vec multi_tie_profile(const MaskingProblem& p, const std::vector<ConstraintBuilder>& constraints,
                      const Responses& naive) {
  const std::size_t m = p.data.m;
  Vec w(m, 1e-9);
  for (const Vec& b : naive) axpy(1.0 / naive.size(), b, w);
  auto feasible = [&](double c) {
    const Vec x = scaled(w, c);
    for (std::size_t t = 0; t < p.data.horizon(); ++t)
      for (const auto& builder : constraints)
        if (builder(t, p.data).value(x) > 0.0) return false;
    return true;
  };
  if (feasible(1.0)) return w;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return scaled(w, lo);
}

// --- naive responses ------------------------------------------------------

Responses ascend_naive(const MaskingProblem& p,
                       const std::function<double(std::size_t, std::span<const double>)>& util,
                       const std::function<Vec(std::size_t, std::span<const double>)>& util_grad,
                       const std::function<Vec(std::size_t, std::span<const double>)>& project) {
  const std::size_t K = p.data.horizon(), m = p.data.m;
  Rng rng = Rng(p.solver.seed).substream(0x6e616976ULL);
  Responses out(K);
  bool all_converged = true;
  for (std::size_t t = 0; t < K; ++t) {
    double best_val = -kInf;
    Vec best;
    bool best_converged = false;
    for (int start = 0; start < p.solver.restarts; ++start) {
      bool converged = false;
      Vec x(m);
      for (std::size_t i = 0; i < m; ++i)
        x[i] = start == 0 ? 0.1 : rng.uniform(0.01, 1.0);
      x = project(t, x);
      double step = 0.25;
      for (int it = 0; it < 600; ++it) {
        const Vec g = util_grad(t, x);
        const double f0 = util(t, x);
        bool accepted = false;
        double s = step;
        for (int bt = 0; bt < 40 && !accepted; ++bt, s *= 0.5) {
          Vec moved = x;
          axpy(s, g, moved);
          Vec cand = project(t, moved);
          const Vec d = sub(cand, x);
          const double sq = dot(d, d);
          if (sq <= 1e-26) break;
          if (util(t, cand) >= f0 + 1e-4 * sq / s) {
            x = std::move(cand);
            accepted = true;
            step = std::min(4.0, s * 1.5);
          }
        }
        if (!accepted) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        // budget exhausted; accept if the projected gradient step is inert
        Vec moved = x;
        axpy(1e-3, util_grad(t, x), moved);
        converged = norm2(sub(project(t, moved), x)) <= 1e-7 * (1.0 + norm2(x));
      }
      const double v = util(t, x);
      if (v > best_val) {
        best_val = v;
        best = x;
        best_converged = converged;
      }
    }
    all_converged &= best_converged;
    out[t] = std::move(best);
  }
  if (!all_converged)
    throw NaiveSolveFailure("solve_naive: projected ascent did not converge", out);
  return out;
}

}  // namespace

Responses solve_naive(const MaskingProblem& p) {
  p.data.validate();
  const std::size_t K = p.data.horizon();
  Responses out(K);
  if (p.data.kind == DatasetKind::ConstraintKnown) {
    switch (p.radar_strategy.family()) {
      case Strategy::Family::SqrtSum:
      case Strategy::Family::QuadraticSum:
        for (std::size_t t = 0; t < K; ++t)
          out[t] = naive_waveform(p.radar_strategy, p.data.probes[t]);
        return out;
      case Strategy::Family::CobbDouglas: {
        // budget-share rule: spend a_i / sum(a) of the unit budget on good i
        const Vec& a = p.radar_strategy.params();
        double total = 0.0;
        for (double e : a) total += e;
        if (total <= 0.0) throw std::invalid_argument("solve_naive: all-zero exponents");
        for (std::size_t t = 0; t < K; ++t) {
          out[t].assign(p.data.m, 0.0);
          for (std::size_t i = 0; i < p.data.m; ++i)
            out[t][i] = a[i] / total / std::max(p.data.probes[t][i], 1e-300);
        }
        return out;
      }
      default: {
        const Hooks h = utility_hooks(p);
        return ascend_naive(p, h.util, h.util_grad, h.project);
      }
    }
  }
  // utility-known: per-step Cobb-Douglas utilities under the hidden constraint
  if (!p.data.has_budgets())
    throw std::invalid_argument("solve_naive: utility-known problems need budget levels");
  if (p.radar_strategy.family() == Strategy::Family::KNorm) {
    for (std::size_t t = 0; t < K; ++t)
      out[t] = naive_beam(p.data.probes[t], p.radar_strategy.scalar_param(), p.data.budgets[t]);
    return out;
  }
  std::vector<Strategy> knowns;
  knowns.reserve(K);
  for (std::size_t t = 0; t < K; ++t) knowns.push_back(p.data.known_function(t));
  const Hooks h = constraint_hooks(p, knowns);
  return ascend_naive(p, h.util, h.util_grad, h.project);
}

Responses solve_naive_multi(const MaskingProblem& p,
                            const std::vector<ConstraintBuilder>& constraints) {
  p.data.validate();
  const Hooks h = multi_hooks(p, constraints);
  return ascend_naive(p, h.util, h.util_grad, h.project);
}

MaskingReport mask_utility(const MaskingProblem& p) {
  if (p.data.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("mask_utility: constraint-known dataset required");
  for (const Vec& a : p.data.probes)
    for (double v : a)
      if (!(v > 0.0))
        throw std::invalid_argument("mask_utility: probes must be strictly positive");
  Responses naive = solve_naive(p);
  Hooks h = utility_hooks(p);
  h.tie_profile = utility_tie_profile(p.data, naive);
  return run_mask(p, h, std::move(naive));
}

MaskingReport mask_constraint(const MaskingProblem& p) {
  if (p.data.kind != DatasetKind::UtilityKnown)
    throw std::invalid_argument("mask_constraint: utility-known dataset required");
  if (!p.data.has_budgets())
    throw std::invalid_argument("mask_constraint: budget levels required");
  Responses naive = solve_naive(p);
  std::vector<Strategy> knowns;
  knowns.reserve(p.data.horizon());
  for (std::size_t t = 0; t < p.data.horizon(); ++t) knowns.push_back(p.data.known_function(t));
  Hooks h = constraint_hooks(p, knowns);
  h.tie_profile = constraint_tie_profile(p, naive);
  return run_mask(p, h, std::move(naive));
}

MaskingReport mask_utility_multi(const MaskingProblem& p,
                                 const std::vector<ConstraintBuilder>& constraints) {
  if (p.data.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("mask_utility_multi: constraint-known dataset required");
  Responses naive = solve_naive_multi(p, constraints);
  Hooks h = multi_hooks(p, constraints);
  h.tie_profile = multi_tie_profile(p, constraints, naive);
  return run_mask(p, h, std::move(naive));
}

MaskingReport mask_generic(const MaskingProblem& p, const IrlSystemEvaluator& eval) {
  if (p.data.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("mask_generic: constraint-known dataset required");
  Responses naive = solve_naive(p);
  Hooks h = utility_hooks(p);
  const Strategy u = p.radar_strategy;
  auto base = std::make_shared<ProbeResponseDataset>(scratch_dataset(p.data));
  h.margin = [u, base, eval](const Responses& r) {
    base->responses = r;
    return margin_generic(eval, u, *base);
  };
  h.margin_grad = nullptr;  // evaluator structure unknown, use differences
  h.residual_fn = [u, base, eval](const Responses& r) {
    base->responses = r;
    return eval(u, *base);
  };
  h.tie_profile = utility_tie_profile(p.data, naive);
  return run_mask(p, h, std::move(naive));
}

}  // namespace cogmask
