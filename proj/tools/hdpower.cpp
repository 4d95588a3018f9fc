// Command-line front end: statistics and permutation tests on CSV data,
// experiment runs from config files, and analytic population MMD values.

#include "hdpower/alternatives.hpp"
#include "hdpower/analytic.hpp"
#include "hdpower/config.hpp"
#include "hdpower/error.hpp"
#include "hdpower/format.hpp"
#include "hdpower/io.hpp"
#include "hdpower/manifest.hpp"
#include "hdpower/parallel.hpp"
#include "hdpower/permutation.hpp"
#include "hdpower/powerlab.hpp"
#include "hdpower/statistics.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace hdpower;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Global {
  unsigned threads = 0;
};

struct DataArgs {
  std::vector<std::string> two_sample;
  std::string independence;
  Index xdim = 0;
  bool header = false;
  std::string statistic;
  std::string kernel = "gaussian";
  std::string bandwidth = "median";
  std::string metric = "l2";
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
  auto* ts = cmd->add_option("--two-sample", a.two_sample, "X and Y sample files")
                 ->expected(2)
                 ->type_name("X Y");
  auto* ind = cmd->add_option("--independence", a.independence,
                              "paired file holding X columns then Y columns");
  ts->excludes(ind);
  cmd->add_option("--xdim", a.xdim, "number of X columns in an independence file")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--header", a.header, "skip the first line of every data file");
  cmd->add_option("--statistic", a.statistic, "mmd2b, mmd2u, energy, dcov2, dcor2, udcor2, hsic")
      ->required();
  cmd->add_option("--kernel", a.kernel, "gaussian or laplace")->capture_default_str();
  cmd->add_option("--bandwidth", a.bandwidth, "median, fixed:<g> or dpow:<alpha>[:<scale>]")
      ->capture_default_str();
  cmd->add_option("--metric", a.metric, "l2 or l1 (distance statistics)")->capture_default_str();
}

struct LoadedData {
  DataMatrix x;
  DataMatrix y;
  TestMode mode;
};

LoadedData load_data(const DataArgs& a) {
  if (!a.two_sample.empty()) {
    return {read_data_csv(a.two_sample[0], a.header), read_data_csv(a.two_sample[1], a.header),
            TestMode::TwoSample};
  }
  if (a.independence.empty()) throw InputError("give --two-sample X Y or --independence FILE");
  const DataMatrix xy = read_data_csv(a.independence, a.header);
  if (a.xdim < 1 || a.xdim >= xy.d()) {
    throw InputError("--xdim must be between 1 and " + std::to_string(xy.d() - 1) + " for " +
                     a.independence + " (" + std::to_string(xy.d()) + " columns)");
  }
  return {xy.columns(0, a.xdim), xy.columns(a.xdim, xy.d() - a.xdim), TestMode::Independence};
}

StatisticKind statistic_kind(const DataArgs& a) {
  StatisticKind kind;
  kind.statistic = parse_statistic(a.statistic);
  kind.kernel = parse_kernel_family(a.kernel);
  kind.bandwidth = parse_bandwidth_rule(a.bandwidth);
  validate(kind.bandwidth);
  kind.metric = parse_distance_metric(a.metric);
  return kind;
}

void check_mode(const StatisticKind& kind, TestMode mode) {
  const bool two = mode == TestMode::TwoSample;
  if (is_two_sample(kind.statistic) != two) {
    throw ModeError("statistic " + to_string(kind.statistic) + " needs " +
                    (two ? "--independence" : "--two-sample") + " data");
  }
}

void print_config(std::ostream& out, const StatisticKind& kind, double gamma_x, double gamma_y) {
  if (uses_kernel(kind.statistic)) {
    out << "kernel: " << to_string(kind.kernel) << "\n"
        << "bandwidth: " << to_string(kind.bandwidth) << "\n";
    if (kind.statistic == Statistic::HSIC) {
      out << "gamma_x: " << format_double(gamma_x) << "\n"
          << "gamma_y: " << format_double(gamma_y) << "\n";
    } else {
      out << "gamma: " << format_double(gamma_x) << "\n";
    }
  } else {
    out << "metric: " << to_string(kind.metric) << "\n";
  }
}

int cmd_stat(const DataArgs& a) {
  const auto kind = statistic_kind(a);
  const auto data = load_data(a);
  check_mode(kind, data.mode);
  const auto v = compute_statistic(kind, data.x, data.y);
  std::ostringstream out;
  out << "statistic: " << to_string(kind.statistic) << "\n"
      << "value: " << format_double(v.value) << "\n"
      << "n: " << v.n << "\n"
      << "m: " << v.m << "\n";
  print_config(out, kind, v.gamma_x, v.gamma_y);
  std::cout << out.str();
  return kExitOk;
}

struct TestArgs {
  Index permutations = 200;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string null_out;
};

int cmd_test(const DataArgs& a, const TestArgs& t, const Global& g) {
  const auto kind = statistic_kind(a);
  const auto data = load_data(a);
  check_mode(kind, data.mode);
  PermutationConfig cfg;
  cfg.permutations = t.permutations;
  cfg.alpha = t.alpha;
  cfg.seed = t.seed;
  cfg.mode = data.mode;
  cfg.threads = g.threads;
  const auto r = permutation_test(data.x, data.y, kind, cfg);
  std::ostringstream out;
  out << "statistic: " << to_string(kind.statistic) << "\n"
      << "mode: " << to_string(data.mode) << "\n"
      << "observed: " << format_double(r.observed) << "\n"
      << "threshold: " << format_double(r.threshold) << "\n"
      << "p_value: " << format_double(r.p_value) << "\n"
      << "reject: " << (r.reject ? "true" : "false") << "\n"
      << "permutations: " << cfg.permutations << "\n"
      << "alpha: " << format_double(cfg.alpha) << "\n"
      << "seed: " << cfg.seed << "\n";
  print_config(out, kind, r.gamma_x, r.gamma_y);
  if (!t.null_out.empty()) {
    std::string csv = "permutation,statistic\n";
    for (std::size_t b = 0; b < r.null_sample.size(); ++b) {
      csv += std::to_string(b) + "," + format_double(r.null_sample[b]) + "\n";
    }
    write_text_atomic(t.null_out, csv);
  }
  std::cout << out.str();
  return kExitOk;
}

struct ExperimentArgs {
  std::string config;
  std::string out_dir = ".";
};

int cmd_experiment(const ExperimentArgs& e, const Global& g) {
  const auto file = load_experiment(e.config);
  RunManifest manifest;
  manifest.experiment = file.name;
  manifest.kind = to_string(file.kind);
  manifest.config_file = e.config;
  manifest.config = file.resolved;
  manifest.threads = g.threads;
  manifest.started = std::chrono::system_clock::now();

  std::string csv;
  std::size_t rows = 0;
  if (file.kind == ExperimentKind::Approximation) {
    auto cfg = file.approximation;
    cfg.threads = g.threads;
    manifest.master_seed = cfg.master_seed;
    const auto table = run_approximation_check(cfg);
    csv = approximation_csv_header() + "\n";
    for (const auto& row : table) csv += to_csv_line(row) + "\n";
    rows = table.size();
  } else {
    csv = power_csv_header() + "\n";
    for (auto cfg : file.power) {
      cfg.threads = g.threads;
      manifest.master_seed = cfg.master_seed;
      const auto curve = file.kind == ExperimentKind::Calibration ? run_calibration(cfg)
                                                                  : run_power_experiment(cfg);
      for (const auto& row : curve.rows) {
        csv += to_csv_line(row) + "\n";
        manifest.failed_trials += row.failed;
      }
      rows += curve.rows.size();
    }
  }
  manifest.finished = std::chrono::system_clock::now();
  manifest.outputs.push_back({file.output, rows});

  // Everything is computed before anything is written, so a failed run leaves no output.
  const fs::path dir(e.out_dir);
  fs::create_directories(dir);
  const fs::path csv_path = dir / file.output;
  const fs::path manifest_path = dir / (fs::path(file.output).stem().string() + ".manifest.json");
  write_text_atomic(csv_path, csv);
  write_text_atomic(manifest_path, manifest.to_json());
  std::cout << "wrote " << csv_path.string() << " (" << rows << " rows)\n"
            << "wrote " << manifest_path.string() << "\n";
  return kExitOk;
}

struct AnalyticArgs {
  Index d = 1;
  double mu = 1.0;
  double sigma = 1.0;
  double gamma = 1.0;
  double tau = 2.0;
  double eps = 0.0;
  std::string regime = "gaussian-median";
  std::string family = "gaussian";
  std::string kernel = "gaussian";
  std::string scenario = "gaussian-mean";
  Index k = 4;
  double rho = 0.5;
};

void print_prediction(const AnalyticPrediction& p) {
  std::ostringstream out;
  out << "value: " << format_double(p.value) << "\n"
      << "method: " << to_string(p.method) << "\n";
  for (const auto& [name, value] : p.params) out << name << ": " << format_double(value) << "\n";
  std::cout << out.str();
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

AlternativeSpec scenario_from(const AnalyticArgs& a) {
  AlternativeSpec spec;
  if (a.scenario == "gaussian-mean" || a.scenario == "gaussian-mean-all") {
    spec = GaussianMeanShift{a.d, a.sigma, a.mu,
                             a.scenario == "gaussian-mean" ? ShiftMode::FirstCoordinate
                                                           : ShiftMode::AllCoordinates};
  } else if (a.scenario == "laplace-mean") {
    spec = LaplaceMeanShift{a.d, a.sigma, a.mu};
  } else if (a.scenario == "gaussian-var") {
    spec = GaussianDiffVariance{a.d, a.sigma, a.tau};
  } else if (a.scenario == "gaussian-dep") {
    spec = GaussianDependent{a.d, a.k, a.rho};
  } else {
    throw InputError("unknown scenario '" + a.scenario + "'");
  }
  validate(spec);
  return spec;
}

int cmd_analytic(const std::string& formula, const AnalyticArgs& a) {
  AnalyticPrediction p;
  const double d = static_cast<double>(a.d);
  if (formula == "kl") {
    const auto spec = scenario_from(a);
    const auto div = divergence(spec);
    std::ostringstream out;
    out << "value: " << format_double(div.value) << "\n"
        << "kind: " << (div.kind == Divergence::Kind::KL ? "kl" : "mi") << "\n"
        << "scenario: " << describe(spec) << "\n";
    std::cout << out.str();
    return kExitOk;
  }
  if (a.d < 1) throw InputError("--d must be at least 1");
  require_positive(a.sigma, "--sigma");
  if (formula == "regime") {
    const Regime r = parse_regime(a.regime);
    p.method = Method::RegimeFormula;
    p.value = regime_prediction(r, a.mu, a.sigma, a.d, a.eps);
    p.params = {{"d", d}, {"mu", a.mu}, {"sigma", a.sigma}, {"eps", a.eps},
                {"gamma", regime_bandwidth(r, a.sigma, a.d, a.eps)}};
    print_prediction(p);
    return kExitOk;
  }
  require_positive(a.gamma, "--gamma");
  if (formula == "gaussian-exact" || formula == "gaussian-taylor" ||
      formula == "laplace-taylor" || formula == "laplace-exact") {
    p.params = {{"d", d}, {"mu", a.mu}, {"sigma", a.sigma}, {"gamma", a.gamma}};
    if (formula == "gaussian-exact") {
      p.value = mmd2_gaussian_exact(std::abs(a.mu), a.sigma, a.gamma, a.d);
    } else if (formula == "gaussian-taylor") {
      p.method = Method::Taylor;
      p.value = mmd2_gaussian_taylor(std::abs(a.mu), a.sigma, a.gamma, a.d);
    } else if (formula == "laplace-taylor") {
      p.method = Method::Taylor;
      p.value = mmd2_laplace_taylor(std::abs(a.mu), a.sigma, a.gamma, a.d);
    } else {
      p.value = laplace_mmd2_exact(a.mu, a.sigma, a.gamma, a.d);
    }
  } else if (formula == "diffvar-taylor" || formula == "diffvar-exact") {
    require_positive(a.tau, "--tau");
    p.params = {{"d", d}, {"sigma", a.sigma}, {"tau", a.tau}, {"gamma", a.gamma}};
    if (formula == "diffvar-taylor") {
      p.method = Method::Taylor;
      p.value = mmd2_diffvar_taylor(a.sigma, a.tau, a.gamma, a.d);
    } else {
      p.value = mmd2_diffvar_exact(a.sigma, a.tau, a.gamma, a.d);
    }
  } else if (formula == "spectral") {
    Distribution1d lhs;
    if (a.family == "gaussian") {
      lhs.family = Distribution1d::Family::Gaussian;
    } else if (a.family == "laplace") {
      lhs.family = Distribution1d::Family::Laplace;
    } else {
      throw InputError("unknown family '" + a.family + "' (expected gaussian or laplace)");
    }
    lhs.sigma = a.sigma;
    Distribution1d rhs = lhs;
    rhs.mu = a.mu;
    const KernelSpec kernel{parse_kernel_family(a.kernel), a.gamma};
    p.method = Method::Quadrature;
    p.value = mmd2_spectral_1d(lhs, rhs, kernel);
    p.params = {{"mu", a.mu}, {"sigma", a.sigma}, {"gamma", a.gamma}};
  } else {
    throw InputError("unknown formula '" + formula + "'");
  }
  print_prediction(p);
  return kExitOk;
}

struct SampleArgs {
  AnalyticArgs scenario;
  Index n = 100;
  Index m = 0;
  std::uint64_t seed = 0;
  std::string out_x;
  std::string out_y;
};

int cmd_sample(const SampleArgs& s) {
  const auto spec = scenario_from(s.scenario);
  if (s.n < 1) throw InputError("--n must be at least 1");
  if (is_two_sample(spec)) {
    if (s.out_y.empty()) throw InputError("two-sample scenarios need --out-y");
    const auto [x, y] = sample_two_sample(spec, s.n, s.m > 0 ? s.m : s.n, s.seed);
    const auto x_csv = format_data_csv(x);
    const auto y_csv = format_data_csv(y);
    write_text_atomic(s.out_x, x_csv);
    write_text_atomic(s.out_y, y_csv);
  } else {
    if (!s.out_y.empty()) throw InputError("--out-y does not apply to paired scenarios");
    const auto [x, y] = sample_joint(std::get<GaussianDependent>(spec), s.n, s.seed);
    RowMatrix joined(x.n(), x.d() + y.d());
    joined << x.values(), y.values();
    write_text_atomic(s.out_x, format_data_csv(DataMatrix(std::move(joined))));
  }
  return kExitOk;
}

void add_scenario_options(CLI::App* cmd, AnalyticArgs& a) {
  cmd->add_option("--scenario", a.scenario,
                  "gaussian-mean, gaussian-mean-all, laplace-mean, gaussian-var, gaussian-dep")
      ->capture_default_str();
  cmd->add_option("--d", a.d, "dimension")->capture_default_str();
  cmd->add_option("--delta", a.mu, "mean shift")->capture_default_str();
  cmd->add_option("--sigma", a.sigma, "scale")->capture_default_str();
  cmd->add_option("--tau", a.tau, "standard deviation of the odd coordinate")
      ->capture_default_str();
  cmd->add_option("--k", a.k, "number of dependent coordinate pairs")->capture_default_str();
  cmd->add_option("--rho", a.rho, "correlation of each dependent pair")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel and distance two-sample and independence tests, power experiments and "
               "population MMD formulas"};
  app.set_version_flag("--version", std::string("hdpower ") + kVersion);
  app.require_subcommand(1);
  Global global;
  global.threads = default_thread_count();
  app.add_option("--threads", global.threads,
                 "worker cap (default: HDPOWER_THREADS or the core count); results do not "
                 "depend on it")
      ->check(CLI::PositiveNumber);

  DataArgs stat_args;
  auto* stat = app.add_subcommand("stat", "compute one statistic on CSV data");
  add_data_options(stat, stat_args);

  DataArgs test_data;
  TestArgs test_args;
  auto* test = app.add_subcommand("test", "permutation test on CSV data");
  add_data_options(test, test_data);
  test->add_option("--permutations", test_args.permutations, "number of relabelings B")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  test->add_option("--alpha", test_args.alpha, "level")->capture_default_str();
  test->add_option("--seed", test_args.seed, "seed of the relabelings")->capture_default_str();
  test->add_option("--null-out", test_args.null_out, "write the permutation null sample as CSV");

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "run an experiment file, write CSV and a manifest");
  experiment->add_option("config", exp_args.config, "experiment file")->required();
  experiment->add_option("--out", exp_args.out_dir, "output directory")->capture_default_str();

  AnalyticArgs an_args;
  std::string formula;
  auto* analytic = app.add_subcommand("analytic", "evaluate a population MMD formula");
  analytic->add_option("formula", formula,
                       "gaussian-exact, gaussian-taylor, regime, laplace-taylor, laplace-exact, "
                       "diffvar-taylor, diffvar-exact, spectral, kl")
      ->required();
  analytic->add_option("--d", an_args.d, "dimension")->capture_default_str();
  analytic->add_option("--mu,--delta", an_args.mu, "norm of the mean difference")
      ->capture_default_str();
  analytic->add_option("--sigma", an_args.sigma, "scale of the distributions")
      ->capture_default_str();
  analytic->add_option("--gamma", an_args.gamma, "kernel bandwidth")->capture_default_str();
  analytic->add_option("--tau", an_args.tau, "standard deviation of the odd coordinate")
      ->capture_default_str();
  analytic->add_option("--eps", an_args.eps, "regime exponent")->capture_default_str();
  analytic->add_option("--regime", an_args.regime,
                       "gaussian-under, gaussian-median, gaussian-over, laplace-under, laplace-over")
      ->capture_default_str();
  analytic->add_option("--family", an_args.family, "distribution family for spectral")
      ->capture_default_str();
  analytic->add_option("--kernel", an_args.kernel, "kernel family for spectral")
      ->capture_default_str();
  analytic->add_option("--scenario", an_args.scenario, "scenario for kl")->capture_default_str();
  analytic->add_option("--k", an_args.k, "dependent pairs for kl")->capture_default_str();
  analytic->add_option("--rho", an_args.rho, "pair correlation for kl")->capture_default_str();

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "draw a data set from a scenario as CSV");
  add_scenario_options(sample, sample_args.scenario);
  sample->add_option("--n", sample_args.n, "rows of X (or pairs)")->capture_default_str();
  sample->add_option("--m", sample_args.m, "rows of Y (default n)");
  sample->add_option("--seed", sample_args.seed, "seed")->capture_default_str();
  sample->add_option("--out-x", sample_args.out_x, "X file (paired scenarios: X then Y columns)")
      ->required();
  sample->add_option("--out-y", sample_args.out_y, "Y file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*stat) return cmd_stat(stat_args);
    if (*test) return cmd_test(test_data, test_args, global);
    if (*experiment) return cmd_experiment(exp_args, global);
    if (*analytic) return cmd_analytic(formula, an_args);
    if (*sample) return cmd_sample(sample_args);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
