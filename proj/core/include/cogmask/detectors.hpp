#pragma once

#include <cstdint>
#include <functional>

#include "cogmask/afriat.hpp"
#include "cogmask/dataset.hpp"
#include "cogmask/rng.hpp"
#include "cogmask/strategy.hpp"

namespace cogmask {

/// Response-measurement noise law, seedable and reproducible.
class NoiseModel {
 public:
  static NoiseModel gaussian_iid(double variance, std::size_t dim);
  static NoiseModel degenerate(std::size_t dim);
  static NoiseModel custom(std::size_t dim, std::function<Vec(Rng&)> sampler);

  Vec sample(Rng& rng) const;
  std::size_t dim() const { return dim_; }
  bool is_degenerate() const { return kind_ == Kind::Degenerate; }
  double variance() const { return variance_; }

 private:
  enum class Kind { Gaussian, Degenerate, Custom };
  NoiseModel(Kind k, std::size_t dim) : kind_(k), dim_(dim) {}
  Kind kind_;
  std::size_t dim_;
  double variance_ = 0.0;
  std::function<Vec(Rng&)> sampler_;
};

struct DetectorConfig {
  double gamma = 0.1;          // significance level in (0,1)
  int quantile_samples = 10000;  // Monte Carlo draws for the threshold
  int replicates = 50;         // fixed noise realizations for conditional estimates
  double epsilon_tol = 1e-7;   // bisection tolerance for the test statistic

  void validate() const;
};

enum class Verdict { Cognitive, NotCognitive };  // null vs alternate call

struct DetectionOutcome {
  double statistic = 0.0;
  double threshold = 0.0;
  Verdict decision = Verdict::Cognitive;  // Cognitive iff statistic <= threshold
};

/// Smallest relaxation epsilon >= 0 making the pairwise system feasible on a
/// noisy dataset; bisection with an LP feasibility check per point. Throws
/// when no relaxation below the hard ceiling works.
double stat_phi(const ProbeResponseDataset& noisy_data, double eps_tol = 1e-7);

/// Same relaxation with theta pinned to the projection of the true strategy
/// onto the noisy data: a closed-form maximum over pairwise slacks, no LP.
/// Infinity when a degenerate multiplier blocks a violated pair.
double stat_phi_conditional(const ProbeResponseDataset& noisy_data, const Strategy& s);

/// Conditional statistic with an externally fixed projection. The
/// conditional error probability conditions on the clean dataset, so the
/// detector paths project the strategy onto the clean responses and hold
/// that theta fixed across noise realizations.
double stat_phi_conditional_fixed(const ProbeResponseDataset& noisy_data,
                                  const ThetaProjection& proj);

/// One draw of the noise bound L for the observed dataset: the budget form
/// max_{s,t} a_t'(w_t - w_s) for constraint-known data, the utility-gap form
/// for utility-known data (observed responses held fixed). Clipped at zero.
double noise_bound_draw(const ProbeResponseDataset& observed, const std::vector<Vec>& noise);

/// n draws of L under fresh noise, deterministic per seed.
Vec sample_noise_bounds(const ProbeResponseDataset& observed, const NoiseModel& noise, int n,
                        std::uint64_t seed);

/// Empirical (1 - gamma) quantile of L over n fresh draws.
double quantile_threshold(const ProbeResponseDataset& observed, const NoiseModel& noise,
                          double gamma, int n, std::uint64_t seed);

double empirical_quantile(Vec samples, double q);

DetectionOutcome run_detector(const ProbeResponseDataset& noisy_data, const NoiseModel& noise,
                              const DetectorConfig& config, std::uint64_t seed);

struct RateEstimate {
  double rate = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

/// Empirical P(not-cognitive | cognitive data) over freshly generated
/// scenarios; the generator receives the trial index and must return clean
/// (noise-free) data.
RateEstimate estimate_type1(const std::function<ProbeResponseDataset(std::uint64_t)>& scenario,
                            const NoiseModel& noise, const DetectorConfig& config, int trials,
                            std::uint64_t seed);

/// Fraction of `replicates` fixed noise realizations whose conditional
/// statistic exceeds the threshold, for the given clean responses.
double conditional_type1_estimate(const ProbeResponseDataset& clean, const Strategy& s,
                                  const NoiseModel& noise, const DetectorConfig& config,
                                  std::uint64_t seed);

/// Conditional detector with frozen noise realizations and threshold, a
/// deterministic function of candidate responses (common random numbers).
class FrozenConditionalDetector {
 public:
  FrozenConditionalDetector(ProbeResponseDataset clean, Strategy hidden,
                            const NoiseModel& noise, const DetectorConfig& config,
                            std::uint64_t seed);

  /// Empirical conditional error probability at these responses.
  double error_prob(const std::vector<Vec>& responses) const;
  double threshold() const { return threshold_; }
  int replicates() const { return static_cast<int>(noise_.size()); }

 private:
  ProbeResponseDataset base_;
  Strategy hidden_;
  std::vector<std::vector<Vec>> noise_;  // R x K
  double threshold_ = 0.0;
};

}  // namespace cogmask
