// Command-line front end: experiment runner plus one-shot dataset tools.
//
// Exit codes: 0 all embedded assertions pass, 1 assertion failure,
// 2 usage or config error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cogmask/detectors.hpp"
#include "cogmask/experiments.hpp"
#include "cogmask/masking.hpp"
#include "cogmask/scenarios.hpp"

namespace {

int cmd_run(const std::string& config_path) {
  cogmask::ExperimentConfig config = cogmask::load_config(config_path);
  const auto diagnostics = cogmask::validate_config(config);
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::fprintf(stderr, "config: %s\n", d.c_str());
    return 2;
  }
  const cogmask::ExperimentResult res = cogmask::run_experiment(config);
  for (const auto& a : res.artifacts) std::printf("wrote %s\n", a.string().c_str());
  if (!res.all_assertions_passed) {
    for (const auto& f : res.failures) std::fprintf(stderr, "FAIL %s\n", f.c_str());
    return 1;
  }
  std::printf("all embedded assertions passed\n");
  return 0;
}

int cmd_irl(const std::string& dataset_path) {
  const cogmask::ProbeResponseDataset d = cogmask::load_dataset(dataset_path);
  const bool constraint_known = d.kind == cogmask::DatasetKind::ConstraintKnown;
  const cogmask::FeasibilityCertificate cert = constraint_known
                                                   ? cogmask::check_utility_rationalizable(d)
                                                   : cogmask::check_constraint_rationalizable(d);
  std::printf("dataset: K=%zu m=%zu kind=%s\n", d.horizon(), d.m,
              constraint_known ? "constraint-known" : "utility-known");
  switch (cert.status) {
    case cogmask::SolveStatus::Feasible:
      std::printf("verdict: rationalizable (lp residual %.3g)\n", cert.lp_residual);
      break;
    case cogmask::SolveStatus::Infeasible:
      std::printf("verdict: not rationalizable\n");
      return 0;
    case cogmask::SolveStatus::SolverError:
      std::printf("verdict: solver error (iteration limit)\n");
      return 1;
  }
  const cogmask::PiecewiseStrategy rec = cogmask::reconstruct_strategy(cert, d);
  const cogmask::Strategy rs = rec.as_strategy(constraint_known
                                                   ? cogmask::StrategyRole::Utility
                                                   : cogmask::StrategyRole::Constraint);
  const cogmask::MarginResult mr = constraint_known ? cogmask::margin_utility(rs, d)
                                                    : cogmask::margin_constraint(rs, d);
  std::printf("reconstruction: %zu pieces, combiner %s\n", rec.pieces.size(),
              rec.combiner == cogmask::PiecewiseStrategy::Combiner::Min ? "min" : "max");
  std::printf("margin of reconstruction: %.12g (binding pair %zu,%zu)\n", mr.margin,
              mr.binding_s, mr.binding_t);
  std::printf("relative optimality: %s\n",
              cogmask::relative_optimality_check(rs, d) ? "pass" : "fail");
  return 0;
}

int cmd_mask(const std::string& dataset_path, double eta, std::uint64_t seed) {
  const cogmask::ProbeResponseDataset d = cogmask::load_dataset(dataset_path);
  const bool constraint_known = d.kind == cogmask::DatasetKind::ConstraintKnown;
  cogmask::MaskingProblem p{constraint_known ? cogmask::Strategy::sqrt_sum()
                                             : cogmask::Strategy::k_norm(2.0),
                            d, eta, cogmask::SolverConfig{}};
  p.solver.seed = seed;
  const cogmask::MaskingReport rep =
      constraint_known ? cogmask::mask_utility(p) : cogmask::mask_constraint(p);
  std::printf("eta=%.6g cap=%.12g (%s)\n", rep.eta, rep.cap,
              cogmask::MaskingReport::kEtaConvention);
  std::printf("margin before=%.12g after=%.12g\n", rep.margin_before, rep.margin_after);
  std::printf("loss=%.12g restarts=%d iterations=%d\n", rep.loss, rep.restarts, rep.iterations);
  for (std::size_t t = 0; t < rep.masked_responses.size(); ++t) {
    std::printf("t=%zu masked:", t);
    for (double v : rep.masked_responses[t]) std::printf(" %.12g", v);
    std::printf("\n");
  }
  return 0;
}

int cmd_detect(const std::string& dataset_path, double gamma, double sigma2,
               std::uint64_t seed) {
  const cogmask::ProbeResponseDataset d = cogmask::load_dataset(dataset_path);
  cogmask::DetectorConfig config;
  config.gamma = gamma;
  const cogmask::NoiseModel noise = cogmask::NoiseModel::gaussian_iid(sigma2, d.m);
  const cogmask::DetectionOutcome o = cogmask::run_detector(d, noise, config, seed);
  std::printf("statistic=%.12g threshold=%.12g decision=%s\n", o.statistic, o.threshold,
              o.decision == cogmask::Verdict::Cognitive ? "cognitive" : "not-cognitive");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cognition-masking experiment harness"};
  app.require_subcommand(1);

  std::string config_path, dataset_path;
  double eta = 0.5, gamma = 0.1, sigma2 = 0.3;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file")->required();

  auto* irl = app.add_subcommand("irl", "feasibility verdict and reconstruction for a dataset");
  irl->add_option("dataset", dataset_path, "dataset file")->required();

  auto* mask = app.add_subcommand("mask", "mask the strategy on a dataset's probes");
  mask->add_option("dataset", dataset_path, "dataset file")->required();
  mask->add_option("--eta", eta, "masking extent in [0,1]")->required();
  mask->add_option("--seed", seed, "rng seed")->required();

  auto* detect = app.add_subcommand("detect", "run the noisy detector on a dataset");
  detect->add_option("dataset", dataset_path, "observed dataset file")->required();
  detect->add_option("--gamma", gamma, "significance level")->required();
  detect->add_option("--sigma2", sigma2, "noise variance per component")->required();
  detect->add_option("--seed", seed, "rng seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (irl->parsed()) return cmd_irl(dataset_path);
    if (mask->parsed()) return cmd_mask(dataset_path, eta, seed);
    if (detect->parsed()) return cmd_detect(dataset_path, gamma, sigma2, seed);
  } catch (const cogmask::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
