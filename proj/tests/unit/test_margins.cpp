#include <doctest.h>

#include <cmath>
#include <limits>

#include "cogmask/margins.hpp"
#include "cogmask/rng.hpp"
#include "cogmask/scenarios.hpp"
#include "test_oracles.hpp"

using namespace cogmask;

namespace {

std::vector<ConstraintBuilder> budget_only() {
  return {[](std::size_t t, const ProbeResponseDataset& d) {
    return Strategy::linear_budget(d.probes[t]);
  }};
}

}  // namespace

TEST_CASE("single point has zero margin") {
  ProbeResponseDataset d;
  d.kind = DatasetKind::ConstraintKnown;
  d.m = 2;
  d.probes = {{1.0, 1.0}};
  d.responses = {{0.5, 0.5}};
  CHECK(margin_utility(Strategy::sqrt_sum(), d).margin == 0.0);
}

TEST_CASE("hand-worked two-point margin matches the grid scan") {
  ProbeResponseDataset d;
  d.kind = DatasetKind::ConstraintKnown;
  d.m = 2;
  d.probes = {{1.0, 1.0}, {1.0, 2.0}};
  d.responses = {{0.5, 0.5}, {2.0 / 3.0, 1.0 / 6.0}};
  const MarginResult mr = margin_utility(Strategy::sqrt_sum(), d);
  CHECK(mr.margin == doctest::Approx(0.11671753).epsilon(1e-6));
  const double scanned = oracles::margin_grid_scan(Strategy::sqrt_sum(), d);
  CHECK(std::abs(mr.margin - scanned) <= 1.5e-6);
  CHECK(mr.margin > 0.0);
  // binding pair indices are within range and distinct
  CHECK(mr.binding_s != mr.binding_t);
}

TEST_CASE("margins match the grid-scan oracle on random data") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 5, 3, seed);
    const double closed = margin_utility(b.strategy, b.data).margin;
    const double scanned = oracles::margin_grid_scan(b.strategy, b.data);
    CHECK(std::abs(closed - scanned) <= 1.5e-6);
  }
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const ExperimentBundle b = generate_experiment(ScenarioName::Beam, 3, 3, seed);
    const double closed = margin_constraint(b.strategy, b.data).margin;
    const double scanned = oracles::margin_grid_scan(b.strategy, b.data);
    CHECK(std::abs(closed - scanned) <= 1.5e-6);
  }
}

TEST_CASE("a strategy failing the test has zero margin") {
  ProbeResponseDataset d;
  d.kind = DatasetKind::ConstraintKnown;
  d.m = 2;
  d.probes = {{2.0, 1.0}, {1.0, 2.0}};
  d.responses = {{0.5, 0.0}, {0.0, 0.5}};
  CHECK(margin_utility(Strategy::sqrt_sum(), d).margin == 0.0);
}

TEST_CASE("naive data from strictly concave utilities has positive margin") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t K = 2 + seed % 6;
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 4, seed);
    CHECK(margin_utility(b.strategy, b.data).margin > 0.0);
  }
}

TEST_CASE("blending responses toward a tie never increases the margin") {
  const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 6, 3, 23);
  Vec tie(3, 0.0);
  for (const auto& r : b.data.responses) axpy(1.0 / 6.0, r, tie);
  double worst = 0.0;
  for (const auto& a : b.data.probes) worst = std::max(worst, dot(a, tie));
  for (auto& v : tie) v /= worst;

  double prev = margin_utility(b.strategy, b.data).margin;
  for (double tau : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    ProbeResponseDataset blended = b.data;
    for (std::size_t t = 0; t < 6; ++t)
      for (std::size_t i = 0; i < 3; ++i)
        blended.responses[t][i] = (1 - tau) * b.data.responses[t][i] + tau * tie[i];
    const double m = margin_utility(b.strategy, blended).margin;
    CHECK(m <= prev + 1e-9);
    prev = m;
  }
  CHECK(prev == doctest::Approx(0.0));
}

TEST_CASE("multi-constraint margin") {
  SUBCASE("single linear budget equals the plain margin on optimizer data") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 4, 3, seed);
      const double plain = margin_utility(b.strategy, b.data).margin;
      const double multi = margin_utility_multi(b.strategy, b.data, budget_only()).margin;
      CHECK(multi == doctest::Approx(plain).epsilon(1e-9));
    }
  }
  SUBCASE("two active constraints match the grid-scan oracle") {
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 3, 3, 7);
    std::vector<ConstraintBuilder> cons = budget_only();
    std::vector<double> caps;
    for (const auto& r : b.data.responses) caps.push_back(norm2(r));
    cons.push_back([caps](std::size_t t, const ProbeResponseDataset&) {
      return Strategy::k_norm_cap(2.0, caps[t]);
    });
    const MarginResult mr = margin_utility_multi(b.strategy, b.data, cons);
    // with the norm cap inactive in the KKT sense, the slacks reduce to the
    // plain system, so the independent scan still applies
    const double scanned = oracles::margin_grid_scan(b.strategy, b.data);
    CHECK(std::abs(mr.margin - scanned) <= 1.5e-6);
  }
  SUBCASE("stationarity failure is an error at strict tolerance") {
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 3, 3, 7);
    ProbeResponseDataset off = b.data;
    for (auto& r : off.responses)
      for (std::size_t i = 0; i < r.size(); ++i)
        r[i] *= 0.2 + 0.15 * static_cast<double>(i);  // skew off the stationary ray
    CHECK_THROWS_AS(margin_utility_multi(b.strategy, off, budget_only(), 1e-9),
                    std::runtime_error);
    CHECK_NOTHROW(margin_utility_multi(
        b.strategy, off, budget_only(), std::numeric_limits<double>::infinity()));
  }
}

TEST_CASE("generic margin evaluator") {
  SUBCASE("pairwise evaluator specializes to the utility margin") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const std::size_t K = 2 + seed % 5;
      const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, K, 3, seed);
      const double direct = margin_utility(b.strategy, b.data).margin;
      const double generic = margin_generic(afriat_residuals, b.strategy, b.data).margin;
      CHECK(generic == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  SUBCASE("constant-zero evaluator gives zero margin") {
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 3, 2, 2);
    const IrlSystemEvaluator zeros = [](const Strategy&, const ProbeResponseDataset&) {
      return std::vector<double>{0.0, 0.0};
    };
    CHECK(margin_generic(zeros, b.strategy, b.data).margin == 0.0);
  }
  SUBCASE("componentwise arithmetic on fixed residuals") {
    const ExperimentBundle b = generate_experiment(ScenarioName::WaveformU1, 3, 2, 2);
    const IrlSystemEvaluator fixed = [](const Strategy&, const ProbeResponseDataset&) {
      return std::vector<double>{-3.0, -1.0, -2.0};
    };
    CHECK(margin_generic(fixed, b.strategy, b.data).margin == doctest::Approx(3.0));
  }
}

TEST_CASE("nonnegative multiplier recovery") {
  const Vec grad_u{1.0, 2.0};
  SUBCASE("exact conic combination is recovered") {
    const std::vector<Vec> gs{{1.0, 0.0}, {0.0, 1.0}};
    double res = 0.0;
    const Vec lam = recover_kkt_multipliers(grad_u, gs, &res);
    CHECK(lam[0] == doctest::Approx(1.0));
    CHECK(lam[1] == doctest::Approx(2.0));
    CHECK(res <= 1e-12);
  }
  SUBCASE("negative coefficients are clipped to the cone boundary") {
    const std::vector<Vec> gs{{1.0, 0.0}, {-1.0, 0.0}};
    const Vec lam = recover_kkt_multipliers(grad_u, gs, nullptr);
    CHECK(lam[0] >= 0.0);
    CHECK(lam[1] >= 0.0);
    CHECK(lam[0] == doctest::Approx(1.0));
    CHECK(lam[1] == doctest::Approx(0.0));
  }
}
