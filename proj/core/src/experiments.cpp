#include "cogmask/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cogmask/detectors.hpp"
#include "cogmask/masking.hpp"
#include "cogmask/scenarios.hpp"
#include "cogmask/spsa.hpp"

namespace cogmask {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>({n, std::thread::hardware_concurrency(), 16}));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// --- config ----------------------------------------------------------------

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "experiment", "K",        "m",          "seed",        "eta_grid",
      "lambda_grid", "gamma_list", "sigma2",  "trials",      "replicates",
      "iterations",  "quantile_samples", "spsa_seeds", "family", "kappa",
      "eta",         "zeta_bound", "instances", "dataset_file", "output_dir"};
  return keys;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest_key(const std::string& unknown) {
  std::string best;
  std::size_t best_d = 4;  // suggest only reasonably close names
  for (const std::string& key : known_keys()) {
    std::size_t d = edit_distance(unknown, key);
    // also match the leading underscore-separated word ("lamda" ~ "lambda_grid")
    const auto us = key.find('_');
    if (us != std::string::npos) d = std::min(d, edit_distance(unknown, key.substr(0, us)));
    if (d < best_d) {
      best_d = d;
      best = key;
    }
  }
  return best;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, int line, int col) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: malformed number '" + v + "' at line " + std::to_string(line),
                      line, col);
  }
}

std::vector<double> parse_list(std::string v, int line, int col) {
  v = trim(v);
  if (!v.empty() && v.front() == '{') {
    if (v.back() != '}')
      throw ConfigError("config: unterminated list at line " + std::to_string(line), line, col);
    v = v.substr(1, v.size() - 2);
  }
  std::vector<double> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    std::istringstream ws(item);
    std::string tok;
    while (ws >> tok) out.push_back(parse_number(tok, line, col));
  }
  if (out.empty())
    throw ConfigError("config: empty list at line " + std::to_string(line), line, col);
  return out;
}

ExperimentKind experiment_from_string(const std::string& v, int line, int col) {
  if (v == "mask-eta-sweep-waveform") return ExperimentKind::MaskEtaSweepWaveform;
  if (v == "mask-eta-sweep-beam") return ExperimentKind::MaskEtaSweepBeam;
  if (v == "spsa-lambda-sweep") return ExperimentKind::SpsaLambdaSweep;
  if (v == "type1-bound") return ExperimentKind::Type1Bound;
  if (v == "misspec-bound") return ExperimentKind::MisspecBound;
  if (v == "single-dataset-irl") return ExperimentKind::SingleDatasetIrl;
  throw ConfigError("config: unknown experiment '" + v + "' at line " + std::to_string(line),
                    line, col);
}

// --- artifacts ---------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::string schema, std::vector<std::string> columns)
      : path_(std::move(path)) {
    body_ += "# cogmask-csv " + schema + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      body_ += columns[i] + (i + 1 < columns.size() ? "," : "");
    body_ += "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      body_ += cells[i] + (i + 1 < cells.size() ? "," : "");
    body_ += "\n";
  }
  std::filesystem::path flush() {
    std::ofstream out(path_, std::ios::binary);
    out << body_;
    if (!out) throw std::runtime_error("cannot write " + path_.string());
    return path_;
  }

 private:
  std::filesystem::path path_;
  std::string body_;
};

struct AssertionLog {
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::string> failures;
  void check(const std::string& name, bool ok, const std::string& detail = "") {
    checks.emplace_back(name, ok);
    if (!ok) failures.push_back(name + (detail.empty() ? "" : ": " + detail));
  }
};

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::MaskEtaSweepWaveform: return "mask-eta-sweep-waveform";
    case ExperimentKind::MaskEtaSweepBeam: return "mask-eta-sweep-beam";
    case ExperimentKind::SpsaLambdaSweep: return "spsa-lambda-sweep";
    case ExperimentKind::Type1Bound: return "type1-bound";
    case ExperimentKind::MisspecBound: return "misspec-bound";
    case ExperimentKind::SingleDatasetIrl: return "single-dataset-irl";
  }
  return "?";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string(), 0, 0);
  ExperimentConfig c;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(line), line, 1);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const int col = static_cast<int>(eq) + 2;
    if (value.empty())
      throw ConfigError("config: missing value for '" + key + "' at line " + std::to_string(line),
                        line, col);

    if (key == "experiment") c.experiment = experiment_from_string(value, line, col);
    else if (key == "K") c.K = static_cast<std::size_t>(parse_number(value, line, col));
    else if (key == "m") c.m = static_cast<std::size_t>(parse_number(value, line, col));
    else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_number(value, line, col));
      c.seed_set = true;
    } else if (key == "eta_grid") c.eta_grid = parse_list(value, line, col);
    else if (key == "lambda_grid") c.lambda_grid = parse_list(value, line, col);
    else if (key == "gamma_list") c.gamma_list = parse_list(value, line, col);
    else if (key == "sigma2") c.sigma2 = parse_number(value, line, col);
    else if (key == "trials") c.trials = static_cast<int>(parse_number(value, line, col));
    else if (key == "replicates") c.replicates = static_cast<int>(parse_number(value, line, col));
    else if (key == "iterations") c.iterations = static_cast<int>(parse_number(value, line, col));
    else if (key == "quantile_samples")
      c.quantile_samples = static_cast<int>(parse_number(value, line, col));
    else if (key == "spsa_seeds") c.spsa_seeds = static_cast<int>(parse_number(value, line, col));
    else if (key == "family") c.family = value;
    else if (key == "kappa") c.kappa = parse_number(value, line, col);
    else if (key == "eta") c.eta = parse_number(value, line, col);
    else if (key == "zeta_bound") c.zeta_bound = parse_number(value, line, col);
    else if (key == "instances") c.instances = static_cast<int>(parse_number(value, line, col));
    else if (key == "dataset_file") c.dataset_file = value;
    else if (key == "output_dir") c.output_dir = value;
    else {
      const std::string hint = suggest_key(key);
      throw ConfigError("config: unknown key '" + key + "' at line " + std::to_string(line) +
                            (hint.empty() ? "" : "; did you mean '" + hint + "'?"),
                        line, 1);
    }
  }
  return c;
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto ascending = [](const std::vector<double>& g) {
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) return false;
    return true;
  };
  if (!c.seed_set) bad.push_back("seed is mandatory (no wall-clock default)");
  if (c.K < 1) bad.push_back("K must be at least 1");
  if (c.m < 1) bad.push_back("m must be at least 1");
  if (c.eta_grid.empty()) bad.push_back("eta_grid must be nonempty");
  if (!ascending(c.eta_grid)) bad.push_back("eta_grid not ascending");
  if (!c.eta_grid.empty() && (c.eta_grid.front() < 0.0 || c.eta_grid.back() > 1.0))
    bad.push_back("eta_grid entries must lie in [0,1]");
  if (c.lambda_grid.empty()) bad.push_back("lambda_grid must be nonempty");
  if (!ascending(c.lambda_grid)) bad.push_back("lambda_grid not ascending");
  if (c.gamma_list.empty()) bad.push_back("gamma_list must be nonempty");
  if (!ascending(c.gamma_list)) bad.push_back("gamma_list not ascending");
  for (double g : c.gamma_list)
    if (!(g > 0.0 && g < 1.0)) {
      bad.push_back("gamma values must lie in (0,1)");
      break;
    }
  if (!(c.sigma2 >= 0.0)) bad.push_back("sigma2 must be nonnegative");
  if (c.trials < 1) bad.push_back("trials must be positive");
  if (c.replicates < 1) bad.push_back("replicates must be positive");
  if (c.iterations < 1) bad.push_back("iterations must be positive");
  if (c.quantile_samples < 1) bad.push_back("quantile_samples must be positive");
  if (c.spsa_seeds < 1) bad.push_back("spsa_seeds must be positive");
  if (c.family != "sqrt" && c.family != "quadratic" && c.family != "beam")
    bad.push_back("family must be sqrt, quadratic, or beam");
  if (!(c.kappa > 1.0)) bad.push_back("kappa must exceed 1");
  if (!(c.eta >= 0.0 && c.eta <= 1.0)) bad.push_back("eta must lie in [0,1]");
  if (!(c.zeta_bound >= 0.0)) bad.push_back("zeta_bound must be nonnegative");
  if (c.instances < 1) bad.push_back("instances must be positive");
  if (c.experiment == ExperimentKind::SingleDatasetIrl && c.dataset_file.empty())
    bad.push_back("single-dataset-irl requires dataset_file");
  return bad;
}

// --- SVG --------------------------------------------------------------------

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<PlotSeries>& series, bool log_x) {
  const double W = 720, H = 480, L = 70, R = 24, T = 40, B = 56;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double xv = log_x ? std::log10(std::max(1e-12, s.x[i])) : s.x[i];
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) { xmin = 0; xmax = 1; }
  if (ymin > ymax) { ymin = 0; ymax = 1; }
  if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
  if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
  const auto px = [&](double x) {
    const double v = log_x ? std::log10(std::max(1e-12, x)) : x;
    return L + (v - xmin) / (xmax - xmin) * (W - L - R);
  };
  const auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  static const char* colors[] = {"#1f6fb2", "#c94f32", "#3a8f4d", "#8455a8", "#b08a00", "#555555"};

  std::string svg;
  svg += "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(W) + "' height='" + num(H) +
         "' viewBox='0 0 " + num(W) + " " + num(H) + "'>\n";
  svg += "<rect width='100%' height='100%' fill='white'/>\n";
  svg += "<text x='" + num(W / 2) + "' y='22' text-anchor='middle' font-size='15'>" + title +
         "</text>\n";
  svg += "<line x1='" + num(L) + "' y1='" + num(H - B) + "' x2='" + num(W - R) + "' y2='" +
         num(H - B) + "' stroke='black'/>\n";
  svg += "<line x1='" + num(L) + "' y1='" + num(T) + "' x2='" + num(L) + "' y2='" + num(H - B) +
         "' stroke='black'/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 5.0;
    const double fy = ymin + (ymax - ymin) * k / 5.0;
    const double gx = L + (W - L - R) * k / 5.0;
    const double gy = H - B - (H - T - B) * k / 5.0;
    const double label_x = log_x ? std::pow(10.0, fx) : fx;
    svg += "<line x1='" + num(gx) + "' y1='" + num(H - B) + "' x2='" + num(gx) + "' y2='" +
           num(H - B + 5) + "' stroke='black'/>\n";
    svg += "<text x='" + num(gx) + "' y='" + num(H - B + 20) +
           "' text-anchor='middle' font-size='11'>" + num(label_x) + "</text>\n";
    svg += "<line x1='" + num(L - 5) + "' y1='" + num(gy) + "' x2='" + num(L) + "' y2='" +
           num(gy) + "' stroke='black'/>\n";
    svg += "<text x='" + num(L - 8) + "' y='" + num(gy + 4) +
           "' text-anchor='end' font-size='11'>" + num(fy) + "</text>\n";
  }
  svg += "<text x='" + num((L + W - R) / 2) + "' y='" + num(H - 14) +
         "' text-anchor='middle' font-size='12'>" + xlabel + "</text>\n";
  svg += "<text x='18' y='" + num((T + H - B) / 2) + "' text-anchor='middle' font-size='12' " +
         "transform='rotate(-90 18 " + num((T + H - B) / 2) + ")'>" + ylabel + "</text>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    svg += "<polyline fill='none' stroke='" + std::string(color) + "' stroke-width='1.8' points='" +
           pts + "'/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg += "<circle cx='" + num(px(s.x[i])) + "' cy='" + num(py(s.y[i])) +
             "' r='2.6' fill='" + color + "'/>\n";
    svg += "<text x='" + num(W - R - 6) + "' y='" + num(T + 16 + 16 * si) +
           "' text-anchor='end' font-size='12' fill='" + color + "'>" + s.name + "</text>\n";
  }
  svg += "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  out << svg;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// --- experiment runners -------------------------------------------------------

namespace {

struct EtaRow {
  double eta, loss, margin_before, margin_after;
  int restarts;
  bool feasible_ok;
};

ExperimentResult run_eta_sweep(const ExperimentConfig& c, const std::filesystem::path& dir,
                               AssertionLog& log) {
  const bool beam = c.experiment == ExperimentKind::MaskEtaSweepBeam;
  const ScenarioName scen = beam ? ScenarioName::Beam
                            : c.family == "quadratic" ? ScenarioName::WaveformU2
                                                      : ScenarioName::WaveformU1;
  const ExperimentBundle bundle = generate_experiment(scen, c.K, c.m, c.seed);

  std::vector<EtaRow> rows(c.eta_grid.size());
  parallel_for(c.eta_grid.size(), [&](std::size_t i) {
    MaskingProblem p{bundle.strategy, bundle.data, c.eta_grid[i], SolverConfig{}};
    p.solver.seed = c.seed;  // shared multi-start seeds across the grid
    const MaskingReport rep = beam ? mask_constraint(p) : mask_utility(p);
    bool feas = true;
    for (std::size_t t = 0; t < rep.masked_responses.size(); ++t) {
      for (double v : rep.masked_responses[t]) feas &= v >= -1e-12;
      if (beam)
        feas &= bundle.strategy.value(rep.masked_responses[t]) <= bundle.data.budgets[t] + 1e-9;
      else
        feas &= dot(bundle.data.probes[t], rep.masked_responses[t]) <= 1.0 + 1e-9;
    }
    rows[i] = {rep.eta, rep.loss, rep.margin_before, rep.margin_after, rep.restarts, feas};
  });

  CsvWriter csv(dir / (to_string(c.experiment) + ".csv"), "eta-sweep/1",
                {"eta", "loss", "margin_before", "margin_after", "solver_restarts"});
  PlotSeries loss_series{"loss", {}, {}};
  for (const EtaRow& r : rows) {
    csv.row({num(r.eta), num(r.loss), num(r.margin_before), num(r.margin_after),
             std::to_string(r.restarts)});
    loss_series.x.push_back(r.eta);
    loss_series.y.push_back(r.loss);
  }

  for (const EtaRow& r : rows) {
    log.check("masked responses feasible at eta=" + num(r.eta), r.feasible_ok);
    log.check("margin cap met at eta=" + num(r.eta),
              r.margin_after <= (1.0 - r.eta) * r.margin_before + 1e-6,
              "margin_after=" + num(r.margin_after));
    if (r.eta == 0.0) log.check("zero loss at eta=0", r.loss <= 1e-9, "loss=" + num(r.loss));
    if (r.eta == 1.0)
      log.check("full masking at eta=1", r.margin_after <= 1e-6,
                "margin_after=" + num(r.margin_after));
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    log.check("loss nondecreasing " + num(rows[i - 1].eta) + "->" + num(rows[i].eta),
              rows[i].loss >= rows[i - 1].loss - 1e-6,
              num(rows[i - 1].loss) + " then " + num(rows[i].loss));

  ExperimentResult res;
  res.artifacts.push_back(csv.flush());
  const auto svg = dir / (to_string(c.experiment) + ".svg");
  write_svg_plot(svg, "masking loss against masking extent", "eta", "loss", {loss_series});
  res.artifacts.push_back(svg);
  return res;
}

ExperimentResult run_lambda_sweep(const ExperimentConfig& c, const std::filesystem::path& dir,
                                  AssertionLog& log) {
  const bool beam = c.family == "beam";
  const ScenarioName scen = beam ? ScenarioName::Beam
                            : c.family == "quadratic" ? ScenarioName::WaveformU2
                                                      : ScenarioName::WaveformU1;
  std::vector<double> lambdas = c.lambda_grid;
  if (lambdas.empty() || lambdas.front() > 0.0)
    lambdas.insert(lambdas.begin(), 0.0);  // control cell

  struct Cell {
    double loss = 0, err = 0;
    int iterations = 0;
  };
  const std::size_t ng = c.gamma_list.size(), nl = lambdas.size(), ns = c.spsa_seeds;
  std::vector<Cell> cells(ng * nl * ns);

  parallel_for(ng * nl * ns, [&](std::size_t idx) {
    const std::size_t gi = idx / (nl * ns);
    const std::size_t li = (idx / ns) % nl;
    const std::size_t si = idx % ns;
    const std::uint64_t cell_seed = Rng(c.seed).substream(1000 + si).next_u64();
    const ExperimentBundle bundle = generate_experiment(scen, c.K, c.m, cell_seed);
    MaskingProblem p{bundle.strategy, bundle.data, 0.0, SolverConfig{}};
    p.solver.seed = cell_seed;
    SpsaConfig sc;
    sc.lambda = lambdas[li];
    sc.iterations = c.iterations;
    sc.detector.gamma = c.gamma_list[gi];
    sc.detector.replicates = c.replicates;
    sc.detector.quantile_samples = c.quantile_samples;
    sc.seed = cell_seed;  // noise realizations shared across lambda
    const SpsaTrace tr = spsa_mask(p, NoiseModel::gaussian_iid(c.sigma2, c.m), sc,
                                   beam ? MaskTarget::Constraint : MaskTarget::Utility);
    cells[idx] = {tr.final_loss, tr.final_error_prob, tr.iterations_run};
  });

  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  CsvWriter csv(dir / "spsa-lambda-sweep.csv", "lambda-sweep/1",
                {"lambda", "gamma", "loss", "cond_type1", "iterations"});
  std::vector<PlotSeries> loss_series, err_series;
  for (std::size_t gi = 0; gi < ng; ++gi) {
    PlotSeries sl{"loss gamma=" + num(c.gamma_list[gi]), {}, {}};
    PlotSeries se{"type1 gamma=" + num(c.gamma_list[gi]), {}, {}};
    double prev_loss = -1e300, prev_err = -1e300;
    for (std::size_t li = 0; li < nl; ++li) {
      std::vector<double> losses, errs, iters;
      for (std::size_t si = 0; si < ns; ++si) {
        const Cell& cell = cells[gi * nl * ns + li * ns + si];
        losses.push_back(cell.loss);
        errs.push_back(cell.err);
        iters.push_back(cell.iterations);
      }
      const double ml = median_of(losses), me = median_of(errs), mi = median_of(iters);
      csv.row({num(lambdas[li]), num(c.gamma_list[gi]), num(ml), num(me),
               num(std::round(mi))});
      sl.x.push_back(std::max(lambdas[li], 0.1));  // log axis; control plotted at 0.1
      sl.y.push_back(ml);
      se.x.push_back(std::max(lambdas[li], 0.1));
      se.y.push_back(me);

      const std::string tag = " gamma=" + num(c.gamma_list[gi]) + " lambda=" + num(lambdas[li]);
      if (lambdas[li] == 0.0)
        log.check("control loss" + tag, ml <= 1e-3, "loss=" + num(ml));
      log.check("loss nondecreasing" + tag, ml >= prev_loss - 1e-6,
                num(prev_loss) + " then " + num(ml));
      log.check("cond type1 nondecreasing" + tag, me >= prev_err - 1e-9,
                num(prev_err) + " then " + num(me));
      prev_loss = std::max(prev_loss, ml);
      prev_err = std::max(prev_err, me);
    }
    loss_series.push_back(std::move(sl));
    err_series.push_back(std::move(se));
  }

  ExperimentResult res;
  res.artifacts.push_back(csv.flush());
  const auto svg1 = dir / "spsa-loss.svg";
  const auto svg2 = dir / "spsa-cond-type1.svg";
  write_svg_plot(svg1, "masking loss against confusion weight", "lambda", "loss", loss_series,
                 true);
  write_svg_plot(svg2, "conditional type-1 error against confusion weight", "lambda",
                 "conditional type-1 error", err_series, true);
  res.artifacts.push_back(svg1);
  res.artifacts.push_back(svg2);
  return res;
}

ExperimentResult run_type1(const ExperimentConfig& c, const std::filesystem::path& dir,
                           AssertionLog& log) {
  struct Trial {
    double stat = 0;
    std::vector<double> thresholds;
  };
  std::vector<Trial> trials(c.trials);
  const NoiseModel noise = NoiseModel::gaussian_iid(c.sigma2, c.m);

  parallel_for(c.trials, [&](std::size_t i) {
    Rng rng = Rng(c.seed).substream(i);
    const ExperimentBundle bundle = generate_experiment(ScenarioName::WaveformU1, c.K, c.m,
                                                        rng.next_u64());
    ProbeResponseDataset noisy = bundle.data;
    noisy.noisy = true;
    for (std::size_t t = 0; t < noisy.horizon(); ++t) {
      const Vec w = noise.sample(rng);
      for (std::size_t j = 0; j < noisy.m; ++j) noisy.responses[t][j] += w[j];
    }
    Trial tr;
    tr.stat = stat_phi(noisy, 1e-6);
    const Vec draws = sample_noise_bounds(noisy, noise, c.quantile_samples, rng.next_u64());
    for (double g : c.gamma_list) tr.thresholds.push_back(empirical_quantile(draws, 1.0 - g));
    trials[i] = std::move(tr);
  });

  CsvWriter csv(dir / "type1-bound.csv", "type1/1", {"gamma", "trials", "rate", "stderr"});
  PlotSeries rate_series{"empirical type-1 rate", {}, {}};
  PlotSeries bound_series{"significance level", {}, {}};
  for (std::size_t gi = 0; gi < c.gamma_list.size(); ++gi) {
    int rejections = 0;
    for (const Trial& tr : trials) rejections += tr.stat > tr.thresholds[gi] ? 1 : 0;
    const double rate = static_cast<double>(rejections) / c.trials;
    const double se = std::sqrt(std::max(0.0, rate * (1.0 - rate) / c.trials));
    csv.row({num(c.gamma_list[gi]), std::to_string(c.trials), num(rate), num(se)});
    rate_series.x.push_back(c.gamma_list[gi]);
    rate_series.y.push_back(rate);
    bound_series.x.push_back(c.gamma_list[gi]);
    bound_series.y.push_back(c.gamma_list[gi]);
    log.check("type1 rate bounded at gamma=" + num(c.gamma_list[gi]),
              rate <= c.gamma_list[gi] + 3.0 * se, "rate=" + num(rate));
  }

  ExperimentResult res;
  res.artifacts.push_back(csv.flush());
  const auto svg = dir / "type1-bound.svg";
  write_svg_plot(svg, "detector type-1 error against significance level", "gamma", "rate",
                 {rate_series, bound_series});
  res.artifacts.push_back(svg);
  return res;
}

ExperimentResult run_misspec(const ExperimentConfig& c, const std::filesystem::path& dir,
                             AssertionLog& log) {
  struct Row {
    double eta_eff, bound, d1, d2, margin_naive;
    bool vacuous;
  };
  std::vector<Row> rows(c.instances);

  parallel_for(c.instances, [&](std::size_t i) {
    Rng rng = Rng(c.seed).substream(7000 + i);
    const ExperimentBundle bundle = generate_experiment(ScenarioName::WaveformU1, c.K, c.m,
                                                        rng.next_u64());
    MaskingProblem p{bundle.strategy, bundle.data, c.eta, SolverConfig{}};
    p.solver.seed = rng.next_u64();
    const MaskingReport rep = mask_utility(p);

    ProbeResponseDataset naive_data = bundle.data;
    naive_data.responses = rep.naive_responses;
    ProbeResponseDataset masked_data = bundle.data;
    masked_data.responses = rep.masked_responses;

    MisspecModel mm;
    mm.bound = c.zeta_bound;
    mm.shifts.resize(c.K);
    for (std::size_t t = 0; t < c.K; ++t) {
      Vec z = rng.normal_vector(c.m, 1.0);
      const double n2 = norm2(z);
      const double target = c.zeta_bound * rng.uniform01();
      mm.shifts[t] = n2 > 0 ? scaled(z, target / n2) : Vec(c.m, 0.0);
    }
    const MisspecBoundResult r =
        misspec_bound(bundle.strategy, naive_data, masked_data, mm, c.eta);
    rows[i] = {r.eta_eff, r.lower_bound, r.d1, r.d2, r.margin_naive, r.vacuous};
  });

  CsvWriter csv(dir / "misspec-bound.csv", "misspec/1",
                {"instance", "eta", "eta_eff", "lower_bound", "d1", "d2", "margin_naive",
                 "vacuous"});
  int violations = 0, usable = 0;
  PlotSeries eff{"eta_eff", {}, {}}, bnd{"lower bound", {}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv.row({std::to_string(i), num(c.eta), num(r.eta_eff), num(r.bound), num(r.d1), num(r.d2),
             num(r.margin_naive), r.vacuous ? "1" : "0"});
    if (!r.vacuous) {
      ++usable;
      if (r.eta_eff < r.bound - 1e-8) ++violations;
      eff.x.push_back(static_cast<double>(i));
      eff.y.push_back(r.eta_eff);
      bnd.x.push_back(static_cast<double>(i));
      bnd.y.push_back(r.bound);
    }
  }
  log.check("masking degradation bound holds on every usable instance", violations == 0,
            std::to_string(violations) + " of " + std::to_string(usable) + " violated");

  ExperimentResult res;
  res.artifacts.push_back(csv.flush());
  const auto svg = dir / "misspec-bound.svg";
  write_svg_plot(svg, "achieved masking extent and its bound", "instance", "eta",
                 {eff, bnd});
  res.artifacts.push_back(svg);
  return res;
}

ExperimentResult run_single_irl(const ExperimentConfig& c, const std::filesystem::path& dir,
                                AssertionLog& log) {
  const ProbeResponseDataset d = load_dataset(c.dataset_file);
  const FeasibilityCertificate cert = d.kind == DatasetKind::ConstraintKnown
                                          ? check_utility_rationalizable(d)
                                          : check_constraint_rationalizable(d);
  double margin = 0.0;
  bool relopt = false;
  if (cert.feasible) {
    const PiecewiseStrategy rec = reconstruct_strategy(cert, d);
    const Strategy rs = rec.as_strategy(d.kind == DatasetKind::ConstraintKnown
                                            ? StrategyRole::Utility
                                            : StrategyRole::Constraint);
    margin = d.kind == DatasetKind::ConstraintKnown ? margin_utility(rs, d).margin
                                                    : margin_constraint(rs, d).margin;
    relopt = relative_optimality_check(rs, d);
    log.check("reconstruction is relatively optimal", relopt);
  }

  CsvWriter csv(dir / "single-dataset-irl.csv", "irl/1",
                {"feasible", "solver_status", "margin", "lp_residual", "relopt"});
  const std::string status = cert.status == SolveStatus::Feasible     ? "feasible"
                             : cert.status == SolveStatus::Infeasible ? "infeasible"
                                                                      : "solver-error";
  csv.row({cert.feasible ? "1" : "0", status, num(margin), num(cert.lp_residual),
           relopt ? "1" : "0"});
  ExperimentResult res;
  res.artifacts.push_back(csv.flush());
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::vector<std::string> bad = validate_config(config);
  if (!bad.empty()) {
    std::string all = "invalid config:";
    for (const auto& b : bad) all += " [" + b + "]";
    throw std::invalid_argument(all);
  }
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);

  AssertionLog log;
  ExperimentResult res;
  switch (config.experiment) {
    case ExperimentKind::MaskEtaSweepWaveform:
    case ExperimentKind::MaskEtaSweepBeam:
      res = run_eta_sweep(config, dir, log);
      break;
    case ExperimentKind::SpsaLambdaSweep:
      res = run_lambda_sweep(config, dir, log);
      break;
    case ExperimentKind::Type1Bound:
      res = run_type1(config, dir, log);
      break;
    case ExperimentKind::MisspecBound:
      res = run_misspec(config, dir, log);
      break;
    case ExperimentKind::SingleDatasetIrl:
      res = run_single_irl(config, dir, log);
      break;
  }

  ordered_json summary;
  summary["experiment"] = to_string(config.experiment);
  summary["seed"] = config.seed;
  ordered_json checks = ordered_json::array();
  for (const auto& [name, ok] : log.checks) {
    ordered_json c;
    c["name"] = name;
    c["pass"] = ok;
    checks.push_back(c);
  }
  summary["assertions"] = checks;
  summary["failures"] = log.failures;
  summary["all_passed"] = log.failures.empty();
  ordered_json arts = ordered_json::array();
  for (const auto& a : res.artifacts) arts.push_back(a.filename().string());
  summary["artifacts"] = arts;

  const auto summary_path = dir / "summary.json";
  std::ofstream out(summary_path, std::ios::binary);
  out << summary.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + summary_path.string());
  res.artifacts.push_back(summary_path);

  res.all_assertions_passed = log.failures.empty();
  res.failures = log.failures;
  return res;
}

}  // namespace cogmask
