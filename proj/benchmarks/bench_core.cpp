#include <benchmark/benchmark.h>

#include "cogmask/afriat.hpp"
#include "cogmask/detectors.hpp"
#include "cogmask/margins.hpp"
#include "cogmask/masking.hpp"
#include "cogmask/riccati.hpp"
#include "cogmask/scenarios.hpp"
#include "cogmask/spsa.hpp"

using namespace cogmask;

namespace {

void BM_feasibility_check(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 4, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_utility_rationalizable(b.data));
  }
}
BENCHMARK(BM_feasibility_check)->Arg(5)->Arg(10)->Arg(20)->Arg(50);

void BM_margin_closed_form(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 4, 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(margin_utility(b.strategy, b.data));
  }
}
BENCHMARK(BM_margin_closed_form)->Arg(10)->Arg(20)->Arg(50);

void BM_stat_phi_bisection(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 4, 13);
  Rng rng(7);
  const NoiseModel noise = NoiseModel::gaussian_iid(0.3, 4);
  ProbeResponseDataset noisy = b.data;
  noisy.noisy = true;
  for (std::size_t t = 0; t < K; ++t) {
    const Vec w = noise.sample(rng);
    for (std::size_t i = 0; i < 4; ++i) noisy.responses[t][i] += w[i];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(stat_phi(noisy, 1e-6));
  }
}
BENCHMARK(BM_stat_phi_bisection)->Arg(5)->Arg(10)->Arg(20);

void BM_conditional_error_prob(benchmark::State& state) {
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 10, 4, 14);
  DetectorConfig config;
  config.replicates = static_cast<int>(state.range(0));
  config.quantile_samples = 2000;
  const FrozenConditionalDetector det(b.data, b.strategy,
                                      NoiseModel::gaussian_iid(0.3, 4), config, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(det.error_prob(b.data.responses));
  }
}
BENCHMARK(BM_conditional_error_prob)->Arg(50)->Arg(200);

void BM_budget_projection(benchmark::State& state) {
  Rng rng(15);
  Vec alpha(8), x(8);
  for (auto& v : alpha) v = rng.uniform(0.2, 2.5);
  for (auto& v : x) v = rng.uniform(-0.5, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_budget(x, alpha));
  }
}
BENCHMARK(BM_budget_projection);

void BM_mask_run(benchmark::State& state) {
  const auto K = static_cast<std::size_t>(state.range(0));
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 4, 16);
  for (auto _ : state) {
    MaskingProblem p{b.strategy, b.data, 0.5, SolverConfig{}};
    p.solver.seed = 3;
    benchmark::DoNotOptimize(mask_utility(p));
  }
}
BENCHMARK(BM_mask_run)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_are_solve(benchmark::State& state) {
  LinearGaussianSystem sys;
  const int X = static_cast<int>(state.range(0));
  sys.A = 0.8 * Eigen::MatrixXd::Identity(X, X);
  for (int i = 0; i + 1 < X; ++i) sys.A(i, i + 1) = 0.1;
  sys.C = Eigen::MatrixXd::Identity(X, X);
  sys.state_noise.assign(X, 1.0);
  sys.obs_precision.assign(X, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(are_solve(sys));
  }
}
BENCHMARK(BM_are_solve)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
