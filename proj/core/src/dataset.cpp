#include "cogmask/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cogmask {
namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("dataset: " + what); }

}  // namespace

Strategy ProbeResponseDataset::known_function(std::size_t t) const {
  if (t >= horizon()) fail("step index out of range");
  if (kind == DatasetKind::ConstraintKnown) return Strategy::linear_budget(probes[t]);
  return Strategy::cobb_douglas(probes[t]);
}

void ProbeResponseDataset::validate(double tol) const {
  const std::size_t K = horizon();
  if (K < 1) fail("horizon must be at least 1");
  if (m == 0) fail("dimension must be positive");
  if (responses.size() != K) fail("probe/response count mismatch");
  if (!budgets.empty() && budgets.size() != K) fail("budget count mismatch");
  for (std::size_t t = 0; t < K; ++t) {
    if (probes[t].size() != m || responses[t].size() != m) fail("vector dimension mismatch");
    for (double a : probes[t])
      if (!(a >= 0.0)) fail("probes must be nonnegative");
    if (!noisy)
      for (double b : responses[t])
        if (!(b >= 0.0)) fail("responses must be nonnegative");
    if (!budgets.empty() && !(budgets[t] > 0.0)) fail("budgets must be positive");
    if (!noisy && kind == DatasetKind::ConstraintKnown) {
      if (dot(probes[t], responses[t]) > 1.0 + tol) fail("response exceeds unit budget");
    }
  }
}

void save_dataset(const ProbeResponseDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open " + path.string() + " for writing");
  out << "prd1 " << (d.kind == DatasetKind::ConstraintKnown ? "constraint-known" : "utility-known")
      << ' ' << d.horizon() << ' ' << d.m << ' ' << (d.has_budgets() ? 1 : 0) << ' '
      << (d.noisy ? 1 : 0) << '\n';
  for (std::size_t t = 0; t < d.horizon(); ++t) {
    for (std::size_t i = 0; i < d.m; ++i) out << fmt17(d.probes[t][i]) << ' ';
    for (std::size_t i = 0; i < d.m; ++i) out << fmt17(d.responses[t][i]) << (i + 1 < d.m || d.has_budgets() ? " " : "");
    if (d.has_budgets()) out << fmt17(d.budgets[t]);
    out << '\n';
  }
  if (!out) fail("write failure on " + path.string());
}

ProbeResponseDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::string magic, kind_token;
  std::size_t K = 0, m = 0;
  int has_budgets = 0, noisy = 0;
  if (!(in >> magic >> kind_token >> K >> m >> has_budgets >> noisy)) fail("malformed header");
  if (magic != "prd1") fail("unrecognized format tag '" + magic + "'");

  ProbeResponseDataset d;
  if (kind_token == "constraint-known")
    d.kind = DatasetKind::ConstraintKnown;
  else if (kind_token == "utility-known")
    d.kind = DatasetKind::UtilityKnown;
  else
    fail("unknown dataset kind '" + kind_token + "'");
  d.m = m;
  d.noisy = noisy != 0;
  d.probes.resize(K, Vec(m));
  d.responses.resize(K, Vec(m));
  if (has_budgets) d.budgets.resize(K);
  for (std::size_t t = 0; t < K; ++t) {
    for (std::size_t i = 0; i < m; ++i)
      if (!(in >> d.probes[t][i])) fail("truncated record at step " + std::to_string(t));
    for (std::size_t i = 0; i < m; ++i)
      if (!(in >> d.responses[t][i])) fail("truncated record at step " + std::to_string(t));
    if (has_budgets && !(in >> d.budgets[t])) fail("truncated record at step " + std::to_string(t));
  }
  d.validate();
  return d;
}

}  // namespace cogmask
