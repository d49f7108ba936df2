#pragma once

#include <cstdint>

#include "cogmask/detectors.hpp"
#include "cogmask/masking.hpp"

namespace cogmask {

struct SpsaConfig {
  double lambda = 0.0;          // confusion weight in the objective
  int iterations = 2000;
  double gradient_step = 0.02;  // two-sided perturbation size
  double update_step = 0.05;
  bool decreasing_step = false;  // step_i = update_step / i when set
  std::uint64_t seed = 1;
  DetectorConfig detector;

  void validate() const;
};

struct SpsaTrace {
  // downsampled every 10 iterations
  std::vector<double> objective, loss, error_prob;
  Responses final_responses;   // best-objective iterate
  double final_objective = 0.0;
  double final_loss = 0.0;
  double final_error_prob = 0.0;
  double threshold = 0.0;
  int iterations_run = 0;
  int step_halvings = 0;
};

/// Euclidean projection onto {b >= 0, alpha'b = 1} (exact sorted-threshold
/// active-set method).
Vec project_budget(std::span<const double> x, std::span<const double> alpha);

enum class MaskTarget { Utility, Constraint };

using FlatObjective = std::function<double(const Responses&)>;

/// One two-sided simultaneous-perturbation gradient estimate with fresh
/// +/-1 directions from rng.
Responses spsa_gradient_estimate(const FlatObjective& f, const Responses& at, double delta,
                                 Rng& rng);

/// Minimizes loss(responses) - lambda * conditional-error(responses) over
/// the per-step feasible sets by projected SPSA with frozen noise
/// realizations and a frozen detector threshold. Deterministic per config.
SpsaTrace spsa_mask(const MaskingProblem& problem, const NoiseModel& noise,
                    const SpsaConfig& config, MaskTarget target);

}  // namespace cogmask
