#include "cogmask/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cogmask {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ProbeResponseDataset with_noise(const ProbeResponseDataset& clean,
                                const std::vector<Vec>& noise) {
  ProbeResponseDataset d = clean;
  d.noisy = true;
  for (std::size_t t = 0; t < d.horizon(); ++t)
    for (std::size_t i = 0; i < d.m; ++i) d.responses[t][i] += noise[t][i];
  return d;
}

}  // namespace

NoiseModel NoiseModel::gaussian_iid(double variance, std::size_t dim) {
  if (!(variance >= 0.0)) throw std::invalid_argument("noise: variance must be nonnegative");
  NoiseModel n(Kind::Gaussian, dim);
  n.variance_ = variance;
  return n;
}

NoiseModel NoiseModel::degenerate(std::size_t dim) { return NoiseModel(Kind::Degenerate, dim); }

NoiseModel NoiseModel::custom(std::size_t dim, std::function<Vec(Rng&)> sampler) {
  NoiseModel n(Kind::Custom, dim);
  n.sampler_ = std::move(sampler);
  return n;
}

Vec NoiseModel::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Gaussian:
      return rng.normal_vector(dim_, std::sqrt(variance_));
    case Kind::Degenerate:
      return Vec(dim_, 0.0);
    case Kind::Custom: {
      Vec v = sampler_(rng);
      if (v.size() != dim_) throw std::runtime_error("noise: sampler dimension mismatch");
      return v;
    }
  }
  return Vec(dim_, 0.0);
}

void DetectorConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("detector: gamma must lie in (0,1)");
  if (quantile_samples < 1) throw std::invalid_argument("detector: quantile_samples < 1");
  if (replicates < 1) throw std::invalid_argument("detector: replicates < 1");
  if (!(epsilon_tol > 0.0)) throw std::invalid_argument("detector: epsilon_tol <= 0");
}

double stat_phi(const ProbeResponseDataset& noisy_data, double eps_tol) {
  const InequalitySystem sys = build_afriat_system(noisy_data);
  if (sys.trivial) return 0.0;

  auto feasible_at = [&](double eps) {
    const LpResult r = solve_system(sys, eps);
    if (r.status == LpStatus::IterationLimit)
      throw std::runtime_error("stat_phi: LP iteration limit inside the line search");
    return r.status == LpStatus::Feasible;
  };
  if (feasible_at(0.0)) return 0.0;

  const double dir = sys.kind == DatasetKind::ConstraintKnown ? -1.0 : 1.0;
  double needed = 0.0;  // relaxation aligning every data term with feasibility
  for (std::size_t t = 0; t < sys.horizon; ++t)
    for (std::size_t s = 0; s < sys.horizon; ++s)
      if (s != t) needed = std::max(needed, dir * sys.term(t, s));
  const double ceiling = 10.0 * needed + 1e-9;
  if (!feasible_at(ceiling))
    throw std::runtime_error("stat_phi: no feasible relaxation below the ceiling");

  double lo = 0.0, hi = ceiling;
  for (int it = 0; it < 200 && hi - lo > eps_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? hi : lo) = mid;
  }
  return hi;
}

double stat_phi_conditional_fixed(const ProbeResponseDataset& noisy_data,
                                  const ThetaProjection& proj) {
  const InequalitySystem sys = build_afriat_system(noisy_data);
  if (sys.trivial) return 0.0;
  const std::size_t K = sys.horizon;
  if (proj.theta.size() != 2 * K)
    throw std::invalid_argument("stat_phi_conditional: projection size mismatch");
  const double dir = sys.kind == DatasetKind::ConstraintKnown ? 1.0 : -1.0;

  double eps = 0.0;
  for (std::size_t sidx = 0; sidx < K; ++sidx)
    for (std::size_t t = 0; t < K; ++t) {
      if (sidx == t) continue;
      const double lam = proj.theta[K + t];
      const double row = proj.theta[sidx] - proj.theta[t] - lam * sys.term(t, sidx);
      const double violation = dir * row;  // > 0 means this pair needs relaxing
      if (violation <= 0.0) continue;
      if (lam <= 1e-12) return kInf;  // no multiplier to absorb the defect
      eps = std::max(eps, violation / lam);
    }
  return eps;
}

double stat_phi_conditional(const ProbeResponseDataset& noisy_data, const Strategy& s) {
  return stat_phi_conditional_fixed(noisy_data, project_strategy(s, noisy_data));
}

double noise_bound_draw(const ProbeResponseDataset& observed, const std::vector<Vec>& noise) {
  const std::size_t K = observed.horizon();
  double bound = 0.0;  // the s == t term pins the draw at zero
  if (observed.kind == DatasetKind::ConstraintKnown) {
    for (std::size_t t = 0; t < K; ++t)
      for (std::size_t s = 0; s < K; ++s) {
        if (s == t) continue;
        bound = std::max(bound, dot(observed.probes[t], sub(noise[t], noise[s])));
      }
    return bound;
  }
  // utility-gap form with the observed responses held fixed
  std::vector<Vec> denoised(K);
  for (std::size_t t = 0; t < K; ++t) denoised[t] = sub(observed.responses[t], noise[t]);
  for (std::size_t t = 0; t < K; ++t) {
    const Strategy ut = observed.known_function(t);
    const double gap_obs_t = ut.value(observed.responses[t]);
    const double gap_den_t = ut.value(denoised[t]);
    for (std::size_t s = 0; s < K; ++s) {
      if (s == t) continue;
      const double observed_gap = gap_obs_t - ut.value(observed.responses[s]);
      const double denoised_gap = gap_den_t - ut.value(denoised[s]);
      bound = std::max(bound, observed_gap - denoised_gap);
    }
  }
  return bound;
}

Vec sample_noise_bounds(const ProbeResponseDataset& observed, const NoiseModel& noise, int n,
                        std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_noise_bounds: n < 1");
  Rng rng = Rng(seed).substream(0x4c626e64ULL);
  const std::size_t K = observed.horizon();
  Vec draws(n);
  std::vector<Vec> w(K);
  for (int k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < K; ++t) w[t] = noise.sample(rng);
    draws[k] = noise_bound_draw(observed, w);
  }
  return draws;
}

double empirical_quantile(Vec samples, double q) {
  if (samples.empty()) throw std::invalid_argument("empirical_quantile: no samples");
  std::sort(samples.begin(), samples.end());
  const double pos = q * static_cast<double>(samples.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(pos)) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(samples.size()) - 1);
  return samples[idx];
}

double quantile_threshold(const ProbeResponseDataset& observed, const NoiseModel& noise,
                          double gamma, int n, std::uint64_t seed) {
  return empirical_quantile(sample_noise_bounds(observed, noise, n, seed), 1.0 - gamma);
}

DetectionOutcome run_detector(const ProbeResponseDataset& noisy_data, const NoiseModel& noise,
                              const DetectorConfig& config, std::uint64_t seed) {
  config.validate();
  DetectionOutcome out;
  out.statistic = stat_phi(noisy_data, config.epsilon_tol);
  out.threshold =
      quantile_threshold(noisy_data, noise, config.gamma, config.quantile_samples, seed);
  out.decision = out.statistic <= out.threshold ? Verdict::Cognitive : Verdict::NotCognitive;
  return out;
}

RateEstimate estimate_type1(const std::function<ProbeResponseDataset(std::uint64_t)>& scenario,
                            const NoiseModel& noise, const DetectorConfig& config, int trials,
                            std::uint64_t seed) {
  config.validate();
  if (trials < 1) throw std::invalid_argument("estimate_type1: trials < 1");
  Rng master(seed);
  int rejections = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const ProbeResponseDataset clean = scenario(static_cast<std::uint64_t>(trial));
    Rng rng = master.substream(trial);
    std::vector<Vec> w(clean.horizon());
    for (auto& v : w) v = noise.sample(rng);
    const ProbeResponseDataset noisy = with_noise(clean, w);
    const DetectionOutcome o = run_detector(noisy, noise, config, rng.next_u64());
    rejections += o.decision == Verdict::NotCognitive ? 1 : 0;
  }
  RateEstimate est;
  est.trials = trials;
  est.rate = static_cast<double>(rejections) / trials;
  est.stderr_ = std::sqrt(std::max(0.0, est.rate * (1.0 - est.rate) / trials));
  return est;
}

double conditional_type1_estimate(const ProbeResponseDataset& clean, const Strategy& s,
                                  const NoiseModel& noise, const DetectorConfig& config,
                                  std::uint64_t seed) {
  const FrozenConditionalDetector det(clean, s, noise, config, seed);
  return det.error_prob(clean.responses);
}

FrozenConditionalDetector::FrozenConditionalDetector(ProbeResponseDataset clean, Strategy hidden,
                                                     const NoiseModel& noise,
                                                     const DetectorConfig& config,
                                                     std::uint64_t seed)
    : base_(std::move(clean)), hidden_(std::move(hidden)) {
  config.validate();
  // Threshold frozen at the supplied (naive) responses for the whole run;
  // the budget-form bound does not depend on responses at all.
  threshold_ =
      quantile_threshold(base_, noise, config.gamma, config.quantile_samples, seed);
  Rng rng = Rng(seed).substream(0x66726f7aULL);
  noise_.assign(config.replicates, std::vector<Vec>(base_.horizon()));
  for (auto& realization : noise_)
    for (auto& v : realization) v = noise.sample(rng);
  base_.noisy = true;
}

double FrozenConditionalDetector::error_prob(const std::vector<Vec>& responses) const {
  // Condition on the clean candidate responses: project the hidden strategy
  // once at the clean points and hold that theta across realizations.
  ProbeResponseDataset clean = base_;
  clean.responses = responses;
  const ThetaProjection proj = project_strategy(hidden_, clean);

  ProbeResponseDataset probe = base_;
  int over = 0;
  for (const auto& realization : noise_) {
    for (std::size_t t = 0; t < probe.horizon(); ++t)
      for (std::size_t i = 0; i < probe.m; ++i)
        probe.responses[t][i] = responses[t][i] + realization[t][i];
    if (stat_phi_conditional_fixed(probe, proj) > threshold_) ++over;
  }
  return static_cast<double>(over) / static_cast<double>(noise_.size());
}

}  // namespace cogmask
