#include "cogmask/spsa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cogmask/projections.hpp"

namespace cogmask {

void SpsaConfig::validate() const {
  if (!(gradient_step > 0.0)) throw std::invalid_argument("spsa: gradient_step <= 0");
  if (!(update_step > 0.0)) throw std::invalid_argument("spsa: update_step <= 0");
  if (iterations < 1) throw std::invalid_argument("spsa: iterations < 1");
  if (lambda < 0.0) throw std::invalid_argument("spsa: lambda < 0");
  detector.validate();
}

Vec project_budget(std::span<const double> x, std::span<const double> alpha) {
  return project_weighted_simplex(x, alpha);
}

Responses spsa_gradient_estimate(const FlatObjective& f, const Responses& at, double delta,
                                 Rng& rng) {
  const std::size_t K = at.size(), m = at.front().size();
  Responses dir(K, Vec(m));
  for (auto& row : dir)
    for (double& v : row) v = rng.sign();
  Responses up = at, dn = at;
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t i = 0; i < m; ++i) {
      up[t][i] += delta * dir[t][i];
      dn[t][i] -= delta * dir[t][i];
    }
  const double scale = (f(up) - f(dn)) / (2.0 * delta);
  Responses g(K, Vec(m));
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t i = 0; i < m; ++i) g[t][i] = scale * dir[t][i];
  return g;
}

SpsaTrace spsa_mask(const MaskingProblem& problem, const NoiseModel& noise,
                    const SpsaConfig& config, MaskTarget target) {
  config.validate();
  problem.data.validate();
  if (target == MaskTarget::Utility && problem.data.kind != DatasetKind::ConstraintKnown)
    throw std::invalid_argument("spsa_mask: utility target needs constraint-known data");
  if (target == MaskTarget::Constraint &&
      (problem.data.kind != DatasetKind::UtilityKnown || !problem.data.has_budgets()))
    throw std::invalid_argument("spsa_mask: constraint target needs utility-known data with budgets");
  if (noise.dim() != problem.data.m) throw std::invalid_argument("spsa_mask: noise dimension mismatch");

  const std::size_t K = problem.data.horizon(), m = problem.data.m;
  const Responses naive = solve_naive(problem);

  ProbeResponseDataset clean = problem.data;
  clean.responses = naive;

  const FrozenConditionalDetector detector(clean, problem.radar_strategy, noise,
                                           config.detector, config.seed);

  std::vector<Strategy> step_utils;
  step_utils.reserve(K);
  for (std::size_t t = 0; t < K; ++t)
    step_utils.push_back(target == MaskTarget::Utility ? problem.radar_strategy
                                                       : problem.data.known_function(t));

  double naive_value = 0.0;
  for (std::size_t t = 0; t < K; ++t) naive_value += step_utils[t].value(naive[t]);

  auto loss_of = [&](const Responses& r) {
    double v = 0.0;
    for (std::size_t t = 0; t < K; ++t) v += step_utils[t].value(r[t]);
    return naive_value - v;
  };
  // Perturbed evaluation points may leave the orthant; the Cobb-Douglas
  // ratio projection inside the detector needs strictly positive responses,
  // so constraint-target evaluations are floored onto the domain.
  auto objective = [&](const Responses& r) {
    if (target == MaskTarget::Utility) return loss_of(r) - config.lambda * detector.error_prob(r);
    Responses safe = r;
    for (auto& row : safe)
      for (double& v : row) v = std::max(v, 1e-10);
    return loss_of(safe) - config.lambda * detector.error_prob(safe);
  };

  const double knorm_kappa = problem.radar_strategy.family() == Strategy::Family::KNorm
                                 ? problem.radar_strategy.scalar_param()
                                 : 2.0;
  // A tiny positive floor on the constraint-target iterates keeps the
  // Cobb-Douglas ratio projection defined when components clip to zero.
  auto project_all = [&](Responses r) {
    for (std::size_t t = 0; t < K; ++t) {
      if (target == MaskTarget::Utility) {
        r[t] = project_budget(r[t], problem.data.probes[t]);
      } else {
        if (problem.radar_strategy.family() == Strategy::Family::KNorm)
          r[t] = project_norm_ball_nonneg(r[t], knorm_kappa, problem.data.budgets[t]);
        else
          r[t] = project_monotone_level(r[t], problem.radar_strategy, problem.data.budgets[t]);
        for (double& v : r[t]) v = std::max(v, 1e-10);
      }
    }
    return r;
  };

  SpsaTrace trace;
  trace.threshold = detector.threshold();
  Rng rng = Rng(config.seed).substream(0x73707361ULL);

  Responses cur = project_all(naive);
  double step = config.update_step;
  const double dir_norm = std::sqrt(static_cast<double>(K * m));

  // Gain normalization: update_step is the per-iteration move relative to
  // the response scale. The raw difference quotient scales with the
  // objective (one replicate flip is lambda / replicates), so divide by the
  // larger of the flip magnitude and a probed difference magnitude.
  double response_scale = 0.0;
  for (const Vec& b : cur) for (double v : b) response_scale += std::abs(v);
  response_scale = std::max(1e-9, response_scale / static_cast<double>(K * m));
  const double flip_scale =
      config.lambda / (2.0 * config.gradient_step * detector.replicates());
  double probe_scale = 0.0;
  {
    Rng prng = Rng(config.seed).substream(0x67616e73ULL);
    Vec mags;
    for (int probe = 0; probe < 3; ++probe) {
      const Responses g = spsa_gradient_estimate(objective, cur, config.gradient_step, prng);
      mags.push_back(std::abs(g[0][0]));
    }
    std::sort(mags.begin(), mags.end());
    probe_scale = mags[1];
  }
  const double gain = dir_norm * response_scale / std::max({flip_scale, probe_scale, 1e-9});

  double best_obj = objective(cur);
  Responses best = cur;
  int stall = 0;

  for (int i = 1; i <= config.iterations; ++i) {
    const Responses g = spsa_gradient_estimate(objective, cur, config.gradient_step, rng);
    const double step_i = (config.decreasing_step ? step / i : step) * gain;
    for (std::size_t t = 0; t < K; ++t)
      axpy(-step_i / dir_norm, g[t], cur[t]);
    cur = project_all(std::move(cur));

    const double err = detector.error_prob(cur);
    const double lo = loss_of(cur);
    const double obj = lo - config.lambda * err;
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best = cur;
      stall = 0;
    } else if (++stall >= 500) {
      stall = 0;
      step *= 0.5;
      if (++trace.step_halvings > 3) {
        trace.iterations_run = i;
        break;
      }
    }
    trace.iterations_run = i;
    if (i % 10 == 0) {
      trace.objective.push_back(obj);
      trace.loss.push_back(lo);
      trace.error_prob.push_back(err);
    }
  }

  trace.final_responses = best;
  trace.final_loss = loss_of(best);
  trace.final_error_prob = detector.error_prob(best);
  trace.final_objective = best_obj;
  return trace;
}

}  // namespace cogmask
