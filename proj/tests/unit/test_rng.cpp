#include <doctest.h>

#include <cmath>

#include "cogmask/rng.hpp"

using cogmask::Rng;

TEST_CASE("identical seeds reproduce identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(43);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += c.next_u64() == d.next_u64() ? 1 : 0;
  CHECK(same == 0);
}

TEST_CASE("substreams are independent of draw order") {
  Rng parent(7);
  parent.next_u64();  // consuming the parent does not disturb substreams
  Rng s3 = parent.substream(3);
  Rng s3_again = Rng(7).substream(3);
  for (int i = 0; i < 100; ++i) CHECK(s3.next_u64() == s3_again.next_u64());
  Rng s4 = parent.substream(4);
  CHECK(s3_again.next_u64() != s4.next_u64());
}

TEST_CASE("uniform stays in range and fills it") {
  Rng r(1);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal moments are sane") {
  Rng r(2);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("sign is symmetric") {
  Rng r(3);
  int plus = 0;
  for (int i = 0; i < 10000; ++i) plus += r.sign() > 0 ? 1 : 0;
  CHECK(plus > 4700);
  CHECK(plus < 5300);
}
