#include <doctest.h>

#include "cogmask/linprog.hpp"
#include "cogmask/rng.hpp"

using namespace cogmask;

TEST_CASE("trivially feasible: nonnegative rhs") {
  const LpResult r = feasible_point(2, {{1.0, 1.0}, {2.0, -1.0}}, {1.0, 3.0});
  REQUIRE(r.status == LpStatus::Feasible);
  CHECK(r.x[0] + r.x[1] <= 1.0 + 1e-9);
}

TEST_CASE("feasible with negative rhs requires phase one") {
  // x1 >= 1 (as -x1 <= -1) and x1 <= 2
  const LpResult r = feasible_point(1, {{-1.0}, {1.0}}, {-1.0, 2.0});
  REQUIRE(r.status == LpStatus::Feasible);
  CHECK(r.x[0] >= 1.0 - 1e-9);
  CHECK(r.x[0] <= 2.0 + 1e-9);
}

TEST_CASE("infeasible system is detected") {
  // x1 >= 2 and x1 <= 1
  const LpResult r = feasible_point(1, {{-1.0}, {1.0}}, {-2.0, 1.0});
  CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("empty system") {
  const LpResult r = feasible_point(3, {}, {});
  REQUIRE(r.status == LpStatus::Feasible);
  CHECK(r.x == Vec{0.0, 0.0, 0.0});
}

TEST_CASE("random feasible systems are certified feasible") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 4, mrows = 12;
    // build rows around a known interior point
    Vec x0(n);
    for (auto& v : x0) v = rng.uniform(0.1, 2.0);
    std::vector<Vec> rows(mrows, Vec(n));
    Vec rhs(mrows);
    for (std::size_t i = 0; i < mrows; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        rows[i][j] = rng.uniform(-1.0, 1.0);
        ax += rows[i][j] * x0[j];
      }
      rhs[i] = ax + rng.uniform(0.01, 1.0);  // strictly satisfied at x0
    }
    const LpResult r = feasible_point(n, rows, rhs);
    REQUIRE(r.status == LpStatus::Feasible);
    for (std::size_t i = 0; i < mrows; ++i) {
      double ax = 0.0;
      for (std::size_t j = 0; j < n; ++j) ax += rows[i][j] * r.x[j];
      CHECK(ax <= rhs[i] + 1e-7);
    }
    for (double v : r.x) CHECK(v >= -1e-12);
  }
}

TEST_CASE("random infeasible systems are certified infeasible") {
  Rng rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 3;
    // a'x <= -1 with a >= 0 has no nonnegative solution; pad with noise rows
    std::vector<Vec> rows{{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)}};
    Vec rhs{-1.0};
    for (int extra = 0; extra < 6; ++extra) {
      Vec row(n);
      for (auto& v : row) v = rng.uniform(-1.0, 1.0);
      rows.push_back(row);
      rhs.push_back(rng.uniform(0.0, 2.0));
    }
    const LpResult r = feasible_point(n, rows, rhs);
    CHECK(r.status == LpStatus::Infeasible);
  }
}

TEST_CASE("degenerate equality-like rows terminate") {
  // x1 + x2 <= 1 and -(x1 + x2) <= -1 pins the simplex face
  const LpResult r = feasible_point(2, {{1.0, 1.0}, {-1.0, -1.0}}, {1.0, -1.0});
  REQUIRE(r.status == LpStatus::Feasible);
  CHECK(r.x[0] + r.x[1] == doctest::Approx(1.0));
}
