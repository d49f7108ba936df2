#pragma once

#include <filesystem>
#include <vector>

#include "cogmask/strategy.hpp"
#include "cogmask/vecmath.hpp"

namespace cogmask {

/// Which side of the probe/response exchange the observer already knows.
///
/// ConstraintKnown: probes are unit-level linear budget weights, the utility
/// is the unknown. UtilityKnown: probes parametrize per-step Cobb-Douglas
/// utilities, the resource constraint is the unknown.
enum class DatasetKind { ConstraintKnown, UtilityKnown };

/// A batch of probe/response pairs with optional budget levels.
struct ProbeResponseDataset {
  DatasetKind kind = DatasetKind::ConstraintKnown;
  std::size_t m = 0;
  std::vector<Vec> probes;
  std::vector<Vec> responses;
  std::vector<double> budgets;  // empty when not applicable
  bool noisy = false;           // noisy measurements may be negative / over budget

  std::size_t horizon() const { return probes.size(); }
  bool has_budgets() const { return !budgets.empty(); }

  /// The known-side function at step t: the budget constraint g_t for
  /// ConstraintKnown data, the per-step utility u_t for UtilityKnown data.
  Strategy known_function(std::size_t t) const;

  /// Throws std::invalid_argument when shape or sign invariants fail.
  /// ConstraintKnown responses must be budget-feasible unless `noisy`.
  void validate(double tol = 1e-8) const;
};

/// Plain-text serialization, bit-stable round trip at 17 significant digits.
ProbeResponseDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const ProbeResponseDataset& d, const std::filesystem::path& path);

}  // namespace cogmask
