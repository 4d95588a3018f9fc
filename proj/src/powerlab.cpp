#include "hdpower/powerlab.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"
#include "hdpower/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace hdpower {

Interval wilson_interval(Index successes, Index trials, double z) {
  if (trials < 0 || successes < 0 || successes > trials) {
    throw InputError("Wilson interval needs 0 <= successes <= trials");
  }
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Clamping also keeps p inside the interval at the 0 and 1 boundaries.
  return {std::clamp(std::min(center - half, p), 0.0, 1.0),
          std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

namespace {

void collect(std::vector<std::string>& errors, const std::function<void()>& check) {
  try {
    check();
  } catch (const Error& e) {
    errors.emplace_back(e.what());
  }
}

[[noreturn]] void throw_all(const std::string& what, const std::vector<std::string>& errors) {
  std::string message = what + " is invalid:";
  for (const auto& e : errors) message += "\n  - " + e;
  throw ConfigError(message);
}

bool all_kernel(const std::vector<StatisticKind>& stats) {
  return std::all_of(stats.begin(), stats.end(),
                     [](const StatisticKind& s) { return uses_kernel(s.statistic); });
}

void check_dims(std::vector<std::string>& errors, const std::vector<Index>& dims) {
  if (dims.empty()) errors.emplace_back("dimension grid is empty");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) errors.emplace_back("dimension " + std::to_string(dims[i]) + " is below 1");
    if (i > 0 && dims[i] <= dims[i - 1]) {
      errors.emplace_back("dimension grid must be strictly increasing (" +
                          std::to_string(dims[i - 1]) + " then " + std::to_string(dims[i]) + ")");
    }
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  check_dims(errors, dims);
  for (Index d : dims) {
    if (d >= 1) collect(errors, [&] { hdpower::validate(with_dimension(scenario, d)); });
  }
  const bool two_sample = is_two_sample(scenario);
  if (statistics.empty()) errors.emplace_back("no statistics given");
  for (const auto& s : statistics) {
    if (is_two_sample(s.statistic) != two_sample) {
      errors.emplace_back("statistic " + to_string(s.statistic) + " does not fit the " +
                          (two_sample ? "two-sample" : "independence") + " scenario " +
                          scenario_id(scenario));
    }
  }
  const bool kernel = !statistics.empty() && all_kernel(statistics);
  const bool distance = std::none_of(statistics.begin(), statistics.end(),
                                     [](const StatisticKind& s) { return uses_kernel(s.statistic); });
  if (!kernel && !distance) {
    errors.emplace_back("kernel and distance statistics cannot share one experiment");
  }
  if (kernel) {
    if (bandwidth_rules.empty()) errors.emplace_back("kernel statistics need at least one bandwidth rule");
    for (const auto& r : bandwidth_rules) collect(errors, [&] { hdpower::validate(r); });
  }
  const Index min_n = std::any_of(statistics.begin(), statistics.end(),
                                  [](const StatisticKind& s) {
                                    return s.statistic == Statistic::UDCor2;
                                  })
                          ? 4
                          : 2;
  if (n < min_n) errors.emplace_back("n must be at least " + std::to_string(min_n));
  if (two_sample && m < 2) errors.emplace_back("m must be at least 2");
  if (trials < 1) errors.emplace_back("trials must be at least 1");
  collect(errors, [&] { permutation.validate(); });
  if (threads < 1) errors.emplace_back("threads must be at least 1");
  if (!errors.empty()) throw_all("experiment '" + name + "'", errors);
}

namespace {

struct TrialOutcome {
  bool failed = false;
  bool reject = false;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct Cell {
  Index d_index;
  Index rule_index;
};

std::vector<TrialOutcome> run_trial(const ExperimentConfig& cfg, const AlternativeSpec& spec,
                                    const std::vector<StatisticKind>& kinds, std::uint64_t seed) {
  const bool two_sample = is_two_sample(spec);
  const std::uint64_t data_seed = derive_seed(seed, {0});
  auto [x, y] = two_sample ? sample_two_sample(spec, cfg.n, cfg.m, data_seed)
                           : sample_joint(std::get<GaussianDependent>(spec), cfg.n, data_seed);
  SampleGeometry geometry(x, y, two_sample ? TestMode::TwoSample : TestMode::Independence);
  PermutationConfig perm = cfg.permutation;
  perm.mode = geometry.mode();
  perm.seed = derive_seed(seed, {1});
  perm.threads = 1;
  std::vector<TrialOutcome> out(kinds.size());
  for (std::size_t s = 0; s < kinds.size(); ++s) {
    try {
      const auto result = run_permutations(prepare_statistic(kinds[s], geometry), perm);
      out[s].reject = result.reject;
      out[s].gamma = result.gamma_x;
    } catch (const DegenerateDataError& e) {
      out[s] = {true, false, std::numeric_limits<double>::quiet_NaN(), e.what()};
    } catch (const InsufficientSampleError& e) {
      out[s] = {true, false, std::numeric_limits<double>::quiet_NaN(), e.what()};
    } catch (const NumericalError& e) {
      out[s] = {true, false, std::numeric_limits<double>::quiet_NaN(), e.what()};
    }
  }
  return out;
}

double median_of(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 == 1 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

PowerCurve run_grid(const ExperimentConfig& cfg) {
  const bool kernel = all_kernel(cfg.statistics);
  const Index n_rules = kernel ? static_cast<Index>(cfg.bandwidth_rules.size()) : 1;
  std::vector<Cell> cells;
  for (Index di = 0; di < static_cast<Index>(cfg.dims.size()); ++di) {
    for (Index ri = 0; ri < n_rules; ++ri) cells.push_back({di, ri});
  }
  const Index n_stats = static_cast<Index>(cfg.statistics.size());
  const Index units = static_cast<Index>(cells.size()) * cfg.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(static_cast<std::size_t>(units));

  parallel_for(units, cfg.threads, [&](std::int64_t u) {
    const Cell& cell = cells[static_cast<std::size_t>(u / cfg.trials)];
    const Index t = u % cfg.trials;
    const AlternativeSpec spec = with_dimension(cfg.scenario, cfg.dims[static_cast<std::size_t>(cell.d_index)]);
    std::vector<StatisticKind> kinds = cfg.statistics;
    if (kernel) {
      for (auto& k : kinds) k.bandwidth = cfg.bandwidth_rules[static_cast<std::size_t>(cell.rule_index)];
    }
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(cell.d_index),
                                      static_cast<std::uint64_t>(cell.rule_index),
                                      static_cast<std::uint64_t>(t)});
    outcomes[static_cast<std::size_t>(u)] = run_trial(cfg, spec, kinds, seed);
  });

  PowerCurve curve;
  const bool two_sample = is_two_sample(cfg.scenario);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Index d = cfg.dims[static_cast<std::size_t>(cells[c].d_index)];
    for (Index s = 0; s < n_stats; ++s) {
      PowerRow row;
      row.scenario = scenario_id(cfg.scenario);
      row.d = d;
      row.rule = kernel ? to_string(cfg.bandwidth_rules[static_cast<std::size_t>(cells[c].rule_index)])
                        : "none";
      row.statistic = to_string(cfg.statistics[static_cast<std::size_t>(s)].statistic);
      row.n = cfg.n;
      row.m = two_sample ? cfg.m : cfg.n;
      row.seed = cfg.master_seed;
      std::vector<double> gammas;
      std::string first_error;
      for (Index t = 0; t < cfg.trials; ++t) {
        const auto& o = outcomes[c * static_cast<std::size_t>(cfg.trials) + static_cast<std::size_t>(t)]
                                [static_cast<std::size_t>(s)];
        if (o.failed) {
          if (row.failed == 0) first_error = o.error;
          ++row.failed;
          continue;
        }
        ++row.trials;
        if (o.reject) ++row.successes;
        gammas.push_back(o.gamma);
      }
      // More than 1% failures would bias the power estimate.
      if (row.failed * 100 > cfg.trials) {
        throw NumericalError("cell " + row.scenario + " d=" + std::to_string(d) + " rule=" + row.rule +
                             " statistic=" + row.statistic + ": " + std::to_string(row.failed) +
                             " of " + std::to_string(cfg.trials) + " trials failed (first: " +
                             first_error + ")");
      }
      row.gamma_median = median_of(std::move(gammas));
      row.power = row.trials > 0 ? static_cast<double>(row.successes) / static_cast<double>(row.trials) : 0.0;
      row.ci = wilson_interval(row.successes, row.trials);
      curve.rows.push_back(std::move(row));
    }
  }
  return curve;
}

}  // namespace

PowerCurve run_power_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_grid(cfg);
}

PowerCurve run_calibration(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!is_null(cfg.scenario)) {
    throw ConfigError("calibration needs a null scenario, got " + describe(cfg.scenario));
  }
  return run_grid(cfg);
}

std::string power_csv_header() {
  return "scenario,d,rule,gamma_median,statistic,n,m,trials,successes,power,ci_lo,ci_hi,seed";
}

std::string to_csv_line(const PowerRow& r) {
  return r.scenario + "," + std::to_string(r.d) + "," + r.rule + "," + format_double(r.gamma_median) +
         "," + r.statistic + "," + std::to_string(r.n) + "," + std::to_string(r.m) + "," +
         std::to_string(r.trials) + "," + std::to_string(r.successes) + "," + format_double(r.power) +
         "," + format_double(r.ci.lo) + "," + format_double(r.ci.hi) + "," + std::to_string(r.seed);
}

void ApproximationConfig::validate() const {
  std::vector<std::string> errors;
  check_dims(errors, dims);
  for (Index d : dims) {
    if (d >= 1) collect(errors, [&] { hdpower::validate(with_dimension(scenario, d)); });
  }
  if (!is_two_sample(scenario)) {
    errors.emplace_back("approximation checks need a two-sample scenario, got " + scenario_id(scenario));
  }
  if (method == Method::RegimeFormula) {
    if (!std::holds_alternative<GaussianMeanShift>(scenario) &&
        !std::holds_alternative<LaplaceMeanShift>(scenario)) {
      errors.emplace_back("regime formulas exist only for mean-shift scenarios");
    }
    collect(errors, [&] { regime_bandwidth(regime, 1.0, 1, eps); });
    const bool gaussian_regime = regime == Regime::GaussianObs1 || regime == Regime::GaussianObs2 ||
                                 regime == Regime::GaussianObs3;
    if (gaussian_regime != (kernel == KernelFamily::Gaussian)) {
      errors.emplace_back("regime " + to_string(regime) + " does not match the " + to_string(kernel) +
                          " kernel");
    }
  } else if (method == Method::Exact || method == Method::Taylor) {
    if (std::holds_alternative<MedianHeuristic>(bandwidth)) {
      errors.emplace_back("approximation checks need a fixed or dpow bandwidth, not the median heuristic");
    }
    collect(errors, [&] { hdpower::validate(bandwidth); });
  } else {
    errors.emplace_back("method must be exact, taylor or regime");
  }
  const bool gaussian_kernel = kernel == KernelFamily::Gaussian;
  const bool paired = std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LaplaceMeanShift>) return !gaussian_kernel;
        if constexpr (std::is_same_v<S, GaussianDependent>) return false;
        return gaussian_kernel;
      },
      scenario);
  if (!paired) {
    errors.emplace_back("no closed form for scenario " + scenario_id(scenario) + " with the " +
                        to_string(kernel) + " kernel");
  }
  if (samples < 100) errors.emplace_back("samples must be at least 100");
  if (replicates < 2) errors.emplace_back("replicates must be at least 2");
  if (!(tolerance.value > 0.0) || !std::isfinite(tolerance.value)) {
    errors.emplace_back("tolerance must be positive");
  }
  if (threads < 1) errors.emplace_back("threads must be at least 1");
  if (!errors.empty()) throw_all("approximation check '" + name + "'", errors);
}

namespace {

double scenario_sigma(const AlternativeSpec& spec) {
  return std::visit(
      [](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, GaussianDependent>) {
          return 1.0;
        } else {
          return s.sigma;
        }
      },
      spec);
}

double row_bandwidth(const ApproximationConfig& cfg, Index d) {
  const double sigma = scenario_sigma(cfg.scenario);
  if (cfg.method == Method::RegimeFormula) return regime_bandwidth(cfg.regime, sigma, d, cfg.eps);
  if (const auto* f = std::get_if<FixedBandwidth>(&cfg.bandwidth)) return f->gamma;
  const auto& p = std::get<PowerOfDimension>(cfg.bandwidth);
  return sigma * p.scale * std::pow(static_cast<double>(d), p.exponent);
}

}  // namespace

AnalyticPrediction approximation_value(const ApproximationConfig& cfg, Index d, double gamma) {
  const AlternativeSpec spec = with_dimension(cfg.scenario, d);
  const bool taylor = cfg.method == Method::Taylor;
  AnalyticPrediction out;
  out.method = cfg.method;
  out.params = {{"d", static_cast<double>(d)}, {"gamma", gamma}};
  if (const auto* g = std::get_if<GaussianMeanShift>(&spec); g && cfg.kernel == KernelFamily::Gaussian) {
    const double norm = g->mode == ShiftMode::FirstCoordinate
                            ? std::abs(g->delta)
                            : std::abs(g->delta) * std::sqrt(static_cast<double>(d));
    out.params.push_back({"sigma", g->sigma});
    out.params.push_back({"delta_norm", norm});
    if (cfg.method == Method::RegimeFormula) {
      out.params.push_back({"eps", cfg.eps});
      out.value = regime_prediction(cfg.regime, norm, g->sigma, d, cfg.eps);
    } else {
      out.value = taylor ? mmd2_gaussian_taylor(norm, g->sigma, gamma, d)
                         : mmd2_gaussian_exact(norm, g->sigma, gamma, d);
    }
    return out;
  }
  if (const auto* l = std::get_if<LaplaceMeanShift>(&spec); l && cfg.kernel == KernelFamily::Laplace) {
    out.params.push_back({"sigma", l->sigma});
    out.params.push_back({"delta_norm", std::abs(l->delta)});
    if (cfg.method == Method::RegimeFormula) {
      out.params.push_back({"eps", cfg.eps});
      out.value = regime_prediction(cfg.regime, std::abs(l->delta), l->sigma, d, cfg.eps);
    } else {
      out.value = taylor ? mmd2_laplace_taylor(std::abs(l->delta), l->sigma, gamma, d)
                         : laplace_mmd2_exact(l->delta, l->sigma, gamma, d);
    }
    return out;
  }
  if (const auto* v = std::get_if<GaussianDiffVariance>(&spec);
      v && cfg.kernel == KernelFamily::Gaussian && cfg.method != Method::RegimeFormula) {
    out.params.push_back({"sigma", v->sigma});
    out.params.push_back({"tau", v->tau});
    out.value = taylor ? mmd2_diffvar_taylor(v->sigma, v->tau, gamma, d)
                       : mmd2_diffvar_exact(v->sigma, v->tau, gamma, d);
    return out;
  }
  throw ConfigError("no closed form for scenario " + scenario_id(spec) + " with the " +
                    to_string(cfg.kernel) + " kernel and method " + to_string(cfg.method));
}

std::vector<ApproximationRow> run_approximation_check(const ApproximationConfig& cfg) {
  cfg.validate();
  std::vector<ApproximationRow> rows;
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
    const Index d = cfg.dims[i];
    ApproximationRow row;
    row.scenario = scenario_id(cfg.scenario);
    row.d = d;
    row.gamma = row_bandwidth(cfg, d);
    row.analytic = approximation_value(cfg, d, row.gamma).value;
    const auto mc = mmd2_montecarlo(with_dimension(cfg.scenario, d), KernelSpec{cfg.kernel, row.gamma},
                                    cfg.samples, derive_seed(cfg.master_seed, {i}), cfg.replicates,
                                    cfg.threads);
    row.mc_estimate = mc.estimate;
    row.mc_stderr = mc.std_error;
    const double gap = mc.estimate - row.analytic;
    row.rel_gap = row.analytic != 0.0 ? gap / row.analytic : std::numeric_limits<double>::infinity();
    row.flagged = cfg.tolerance.kind == Tolerance::Kind::StdErrors
                      ? std::abs(gap) > cfg.tolerance.value * mc.std_error
                      : std::abs(row.rel_gap) > cfg.tolerance.value;
    rows.push_back(row);
  }
  return rows;
}

std::string approximation_csv_header() {
  return "scenario,d,gamma,analytic,mc_estimate,mc_stderr,rel_gap,flag";
}

std::string to_csv_line(const ApproximationRow& r) {
  return r.scenario + "," + std::to_string(r.d) + "," + format_double(r.gamma) + "," +
         format_double(r.analytic) + "," + format_double(r.mc_estimate) + "," +
         format_double(r.mc_stderr) + "," + format_double(r.rel_gap) + "," +
         (r.flagged ? "exceeds" : "ok");
}

}  // namespace hdpower
