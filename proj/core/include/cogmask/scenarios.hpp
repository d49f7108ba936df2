#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cogmask/dataset.hpp"
#include "cogmask/riccati.hpp"
#include "cogmask/strategy.hpp"

namespace cogmask {

/// Per-step maximizer of u under the unit budget alpha'b <= 1, b >= 0.
/// Closed forms for the sqrt-sum (interior stationary point) and
/// quadratic-sum (best budget vertex) families; projected gradient ascent
/// otherwise.
Vec naive_waveform(const Strategy& u, std::span<const double> alpha);

/// Closed-form Cobb-Douglas allocation under a kappa-norm budget:
/// b_i = budget * (e_i / sum e)^{1/kappa}, which puts ||b||_kappa exactly on
/// the boundary. Throws on all-zero exponents.
Vec naive_beam(std::span<const double> exponents, double kappa, double budget);

/// trace(Sigma^{-1}) of the predicted covariance of one tracked target,
/// asymptotic (requires stable dynamics) or at a finite horizon.
double predicted_precision(const LinearGaussianSystem& sys, std::optional<int> horizon);
Vec predicted_precision_probe(const std::vector<LinearGaussianSystem>& targets,
                              std::optional<int> horizon);

/// Deterministic additive measurement misspecification with a uniform
/// L2-norm bound over steps.
struct MisspecModel {
  std::vector<Vec> shifts;
  double bound = 0.0;

  void validate(std::size_t horizon, std::size_t m) const;
};

struct MisspecBoundResult {
  double eta_eff = 0.0;      // achieved masking extent on the shifted data
  double lower_bound = 0.0;  // guaranteed masking extent
  double d1 = 0.0, d2 = 0.0; // min/max gradient-shift inner products
  double margin_naive = 0.0; // clean naive margin (bound denominator term)
  bool vacuous = false;      // nonpositive denominator, bound carries no information
};

/// Masking-degradation bound under misspecified measurements. `hidden` is
/// the masked strategy (utility for constraint-known data, constraint for
/// utility-known data); naive and masked datasets share probes/budgets and
/// differ in responses.
MisspecBoundResult misspec_bound(const Strategy& hidden,
                                 const ProbeResponseDataset& naive_data,
                                 const ProbeResponseDataset& masked_data,
                                 const MisspecModel& misspec, double eta);

enum class ScenarioName { WaveformU1, WaveformU2, Beam };
ScenarioName scenario_from_string(const std::string& name);

/// A generated experiment cell: probes drawn from the scenario's
/// distributions, naive responses attached, and the strategy the masking
/// side wants to hide.
struct ExperimentBundle {
  ProbeResponseDataset data;
  Strategy strategy;
};

/// Waveform scenarios draw probes i.i.d. Unif(0.2, 2.5); the beam scenario
/// draws Cobb-Douglas exponents Unif(0.1, 0.7) and budget levels
/// Unif(0.5, 2) with a 2-norm constraint. Bit-identical per seed.
ExperimentBundle generate_experiment(ScenarioName scenario, std::size_t K, std::size_t m,
                                     std::uint64_t seed);

}  // namespace cogmask
