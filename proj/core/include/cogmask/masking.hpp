#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cogmask/dataset.hpp"
#include "cogmask/margins.hpp"
#include "cogmask/strategy.hpp"

namespace cogmask {

using Responses = std::vector<Vec>;

/// Exact-penalty projected-gradient solver knobs.
struct SolverConfig {
  int restarts = 8;               // naive start plus dithered copies
  int max_iterations = 300;       // per penalty phase
  double initial_penalty = 10.0;
  int max_penalty_doublings = 24;
  double cap_slack = 1e-6;        // accepted margin overshoot at the cap
  double dither = 0.05;
  std::uint64_t seed = 1;
};

/// One masking task: hide `radar_strategy` on the probe sequence in `data`.
/// `data.responses` are ignored; the naive responses are recomputed.
/// eta in [0,1]: the masked margin must not exceed (1 - eta) times the naive
/// margin, so larger eta means stronger masking.
struct MaskingProblem {
  Strategy radar_strategy;
  ProbeResponseDataset data;
  double eta = 0.0;
  SolverConfig solver;
};

struct MaskingReport {
  Responses naive_responses;
  Responses masked_responses;
  double loss = 0.0;            // sum over steps of naive minus masked utility
  double margin_before = 0.0;
  double margin_after = 0.0;
  double eta = 0.0;
  double cap = 0.0;             // (1 - eta) * margin_before
  int restarts = 0;
  int iterations = 0;           // accepted steps on the winning start
  double penalty_residual = 0.0;  // max(0, margin_after - cap)
  // Convention marker for downstream consumers: eta = 1 is full masking.
  static constexpr const char* kEtaConvention = "eta1-max-masking";
};

/// Thrown when no restart reaches the margin cap; `best` carries the
/// lowest-margin iterate found.
class MaskingFailure : public std::runtime_error {
 public:
  MaskingFailure(const std::string& what, MaskingReport best_report)
      : std::runtime_error(what), best(std::move(best_report)) {}
  MaskingReport best;
};

/// Thrown when the naive-response solver stalls; `best` carries the best
/// iterate per step.
class NaiveSolveFailure : public std::runtime_error {
 public:
  NaiveSolveFailure(const std::string& what, Responses best_responses)
      : std::runtime_error(what), best(std::move(best_responses)) {}
  Responses best;
};

/// Per-step maximizers of the problem's utility under its constraint set.
/// Closed forms where the family admits one, projected gradient ascent with
/// multi-start otherwise.
Responses solve_naive(const MaskingProblem& p);
Responses solve_naive_multi(const MaskingProblem& p,
                            const std::vector<ConstraintBuilder>& constraints);

/// Utility masking on a constraint-known dataset (unit linear budgets).
MaskingReport mask_utility(const MaskingProblem& p);

/// Constraint masking on a utility-known dataset (per-step utilities and
/// budget levels; the hidden strategy is the constraint function).
MaskingReport mask_constraint(const MaskingProblem& p);

/// Utility masking under several simultaneous constraints.
MaskingReport mask_utility_multi(const MaskingProblem& p,
                                 const std::vector<ConstraintBuilder>& constraints);

/// Utility masking against an arbitrary reconstruction test supplied as a
/// residual evaluator (satisfied means residual <= 0).
MaskingReport mask_generic(const MaskingProblem& p, const IrlSystemEvaluator& eval);

}  // namespace cogmask
