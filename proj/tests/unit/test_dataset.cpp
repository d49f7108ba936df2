#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cogmask/dataset.hpp"
#include "cogmask/rng.hpp"

using namespace cogmask;

namespace {

ProbeResponseDataset random_dataset(std::uint64_t seed, bool budgets) {
  Rng rng(seed);
  ProbeResponseDataset d;
  d.kind = budgets ? DatasetKind::UtilityKnown : DatasetKind::ConstraintKnown;
  d.m = 3;
  const std::size_t K = 4;
  for (std::size_t t = 0; t < K; ++t) {
    Vec a(3), b(3);
    for (auto& v : a) v = rng.uniform(0.1, 2.0);
    for (auto& v : b) v = rng.uniform(0.0, 0.3);
    // keep constraint-known responses inside the unit budget
    d.probes.push_back(a);
    d.responses.push_back(b);
    if (budgets) d.budgets.push_back(rng.uniform(0.5, 2.0));
  }
  d.validate();
  return d;
}

}  // namespace

TEST_CASE("validation rejects malformed datasets") {
  ProbeResponseDataset d;
  d.kind = DatasetKind::ConstraintKnown;
  d.m = 2;
  d.probes = {{1.0, 1.0}};
  d.responses = {{0.5, 0.4}};
  CHECK_NOTHROW(d.validate());

  SUBCASE("dimension mismatch") {
    d.responses = {{0.5}};
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  }
  SUBCASE("negative response") {
    d.responses = {{-0.1, 0.1}};
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.noisy = true;  // noisy measurements may be negative
    CHECK_NOTHROW(d.validate());
  }
  SUBCASE("budget violation") {
    d.responses = {{2.0, 2.0}};
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  }
  SUBCASE("nonpositive budget level") {
    d.kind = DatasetKind::UtilityKnown;
    d.budgets = {0.0};
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  }
}

TEST_CASE("round trip is bit-stable") {
  const auto tmp = std::filesystem::temp_directory_path() / "cogmask_dataset_roundtrip.txt";
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const bool budgets = seed % 2 == 0;
    const ProbeResponseDataset d = random_dataset(seed, budgets);
    save_dataset(d, tmp);
    const ProbeResponseDataset r = load_dataset(tmp);
    REQUIRE(r.horizon() == d.horizon());
    REQUIRE(r.m == d.m);
    CHECK(r.kind == d.kind);
    for (std::size_t t = 0; t < d.horizon(); ++t) {
      for (std::size_t i = 0; i < d.m; ++i) {
        CHECK(r.probes[t][i] == d.probes[t][i]);      // exact, not approximate
        CHECK(r.responses[t][i] == d.responses[t][i]);
      }
      if (budgets) CHECK(r.budgets[t] == d.budgets[t]);
    }
  }
  std::filesystem::remove(tmp);
}

TEST_CASE("loader rejects garbage") {
  const auto tmp = std::filesystem::temp_directory_path() / "cogmask_dataset_bad.txt";
  {
    std::ofstream out(tmp);
    out << "prd1 constraint-known 2 2 0 0\n1 1 0.5 0.2\n";  // truncated second record
  }
  CHECK_THROWS_AS(load_dataset(tmp), std::invalid_argument);
  {
    std::ofstream out(tmp);
    out << "nope utility-known 1 2 0 0\n";
  }
  CHECK_THROWS_AS(load_dataset(tmp), std::invalid_argument);
  std::filesystem::remove(tmp);
}

TEST_CASE("known side dispatches on kind") {
  ProbeResponseDataset d = random_dataset(5, false);
  CHECK(d.known_function(0).family() == Strategy::Family::LinearBudget);
  d = random_dataset(6, true);
  CHECK(d.known_function(0).family() == Strategy::Family::CobbDouglas);
}
