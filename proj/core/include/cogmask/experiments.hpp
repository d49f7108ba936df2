#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogmask {

enum class ExperimentKind {
  MaskEtaSweepWaveform,
  MaskEtaSweepBeam,
  SpsaLambdaSweep,
  Type1Bound,
  MisspecBound,
  SingleDatasetIrl,
};

std::string to_string(ExperimentKind k);

/// Harness configuration. Every stochastic path draws from `seed`; there is
/// no wall-clock fallback, so a config without an explicit seed is invalid.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::MaskEtaSweepWaveform;
  std::size_t K = 20;
  std::size_t m = 4;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> eta_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> lambda_grid{1.0, 10.0, 100.0, 1000.0};
  std::vector<double> gamma_list{0.05, 0.1, 0.2};
  double sigma2 = 0.3;
  int trials = 2000;
  int replicates = 50;
  int iterations = 2000;
  int quantile_samples = 10000;
  int spsa_seeds = 5;
  std::string family = "sqrt";  // sqrt | quadratic (waveform utilities)
  double kappa = 2.0;
  double eta = 0.8;             // masking extent for the misspec experiment
  double zeta_bound = 0.01;
  int instances = 200;
  std::string dataset_file;
  std::string output_dir = "out";
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string msg, int line, int column)
      : std::runtime_error(std::move(msg)), line(line), column(column) {}
  int line = 0;
  int column = 0;
};

/// Parses a `key = value` config file. Unknown keys are rejected with a
/// closest-match suggestion; parse errors carry line and column.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every violated invariant, one diagnostic per entry; empty means valid.
std::vector<std::string> validate_config(const ExperimentConfig& config);

struct ExperimentResult {
  bool all_assertions_passed = true;
  std::vector<std::string> failures;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs one experiment cellwise, writes CSV + SVG + summary.json into
/// config.output_dir, and evaluates the experiment's embedded assertions.
/// Artifacts are pure functions of (config, seed).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Line-plot SVG writer (hand-rolled polylines, no plotting dependency).
struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool log_x = false);

}  // namespace cogmask
