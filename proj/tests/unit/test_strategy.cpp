#include <doctest.h>

#include <cmath>

#include "cogmask/rng.hpp"
#include "cogmask/strategy.hpp"

using namespace cogmask;

namespace {

// central finite differences at an interior point
Vec fd_gradient(const Strategy& s, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  Vec p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    p[i] = x[i] + h;
    const double up = s.value(p);
    p[i] = x[i] - h;
    const double dn = s.value(p);
    p[i] = x[i];
    g[i] = (up - dn) / (2 * h);
  }
  return g;
}

void check_gradient_matches_fd(const Strategy& s, Rng& rng, double lo = 0.2, double hi = 2.0) {
  for (int rep = 0; rep < 25; ++rep) {
    Vec x(4);
    for (auto& v : x) v = rng.uniform(lo, hi);
    const Vec g = s.gradient(x);
    const Vec fd = fd_gradient(s, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double scale = std::max({1e-8, std::abs(g[i]), std::abs(fd[i])});
      CHECK(std::abs(g[i] - fd[i]) / scale <= 1e-5);
    }
  }
}

}  // namespace

TEST_CASE("gradients agree with central differences at interior points") {
  Rng rng(11);
  check_gradient_matches_fd(Strategy::sqrt_sum(), rng);
  check_gradient_matches_fd(Strategy::quadratic_sum(), rng);
  check_gradient_matches_fd(Strategy::cobb_douglas({0.3, 0.5, 0.2, 0.7}), rng);
  check_gradient_matches_fd(Strategy::linear_budget({1.0, 2.0, 0.5, 0.1}), rng);
  check_gradient_matches_fd(Strategy::k_norm(2.0), rng);
  check_gradient_matches_fd(Strategy::k_norm(3.0), rng);
  check_gradient_matches_fd(Strategy::k_norm_cap(2.0, 1.5), rng);
}

TEST_CASE("family values") {
  CHECK(Strategy::sqrt_sum().value(Vec{4.0, 9.0}) == doctest::Approx(5.0));
  CHECK(Strategy::quadratic_sum().value(Vec{1.0, 2.0}) == doctest::Approx(5.0));
  CHECK(Strategy::cobb_douglas({0.5, 0.5}).value(Vec{4.0, 9.0}) == doctest::Approx(6.0));
  CHECK(Strategy::linear_budget({2.0, 1.0}).value(Vec{0.5, 0.0}) == doctest::Approx(0.0));
  CHECK(Strategy::k_norm(2.0).value(Vec{3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(Strategy::k_norm_cap(2.0, 5.0).value(Vec{3.0, 4.0}) == doctest::Approx(0.0));
}

TEST_CASE("clamping keeps unit-domain families finite on noisy points") {
  const Vec noisy{-0.5, 0.3};
  CHECK(std::isfinite(Strategy::sqrt_sum().value(noisy)));
  CHECK(Strategy::sqrt_sum().value(noisy) == doctest::Approx(std::sqrt(0.3)));
  CHECK(Strategy::cobb_douglas({0.5, 0.5}).value(noisy) == doctest::Approx(0.0));
  // the linear budget extends literally
  CHECK(Strategy::linear_budget({1.0, 1.0}).value(noisy) == doctest::Approx(-1.2));
}

TEST_CASE("boundary gradients fall back to one-sided differences") {
  const Vec edge{0.0, 1.0};
  const Vec g = Strategy::sqrt_sum().gradient(edge);
  CHECK(std::isfinite(g[0]));
  CHECK(g[0] > 1e3);  // steep but finite near the root singularity
  CHECK(g[1] == doctest::Approx(0.5));
}

TEST_CASE("custom strategies work with and without explicit gradients") {
  auto value = [](std::span<const double> x) { return x[0] + 2.0 * x[1]; };
  const Strategy with_fd = Strategy::custom("affine", StrategyRole::Utility, value);
  const Vec g = with_fd.gradient(Vec{0.3, 0.4});
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK_THROWS_AS(Strategy::custom("bad", StrategyRole::Utility, nullptr),
                  std::invalid_argument);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Strategy::cobb_douglas({-0.1, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(Strategy::k_norm(1.0), std::invalid_argument);
  CHECK_THROWS_AS(Strategy::linear_budget({-1.0}), std::invalid_argument);
}
