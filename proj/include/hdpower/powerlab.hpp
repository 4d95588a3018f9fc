#pragma once

#include "hdpower/alternatives.hpp"
#include "hdpower/analytic.hpp"
#include "hdpower/permutation.hpp"
#include "hdpower/statistics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdpower {

/// Two-sided 95% Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

Interval wilson_interval(Index successes, Index trials, double z = 1.959963984540054);

/// One Monte Carlo power study. The scenario's dimension is replaced by each
/// entry of `dims`. Kernel statistics are run once per bandwidth rule;
/// distance statistics ignore the rules and get a single row per d.
struct ExperimentConfig {
  std::string name = "experiment";
  AlternativeSpec scenario = GaussianMeanShift{};
  std::vector<Index> dims{1};
  std::vector<StatisticKind> statistics{StatisticKind{}};
  std::vector<BandwidthRule> bandwidth_rules{MedianHeuristic{}};
  Index n = 100;
  Index m = 100;
  Index trials = 500;
  /// Permutation count and alpha; the mode is derived from the scenario and
  /// the per-trial seed from master_seed.
  PermutationConfig permutation{};
  std::uint64_t master_seed = 1;
  /// Worker cap; results do not depend on it.
  unsigned threads = 1;

  /// Collects every violated constraint into a single ConfigError.
  void validate() const;
};

struct PowerRow {
  std::string scenario;
  Index d = 0;
  std::string rule;
  /// Median over completed trials of the resolved bandwidth (NaN for distance statistics).
  double gamma_median = 0.0;
  std::string statistic;
  Index n = 0;
  Index m = 0;
  /// Completed trials; failed ones are excluded here and counted in `failed`.
  Index trials = 0;
  Index successes = 0;
  double power = 0.0;
  Interval ci;
  std::uint64_t seed = 0;
  Index failed = 0;
};

struct PowerCurve {
  std::vector<PowerRow> rows;
};

/// Trial t of cell (d-index, rule-index) samples data and permutations from
/// substreams of derive_seed(master_seed, {d-index, rule-index, t}); all
/// statistics of the cell see the same data and relabelings. A cell aborts
/// with NumericalError when more than 1% of its trials fail.
PowerCurve run_power_experiment(const ExperimentConfig& cfg);

/// Same procedure on a scenario that satisfies the null exactly; each row's
/// power is the type-1 error rate. Throws ConfigError for a non-null scenario.
PowerCurve run_calibration(const ExperimentConfig& cfg);

/// Power CSV header (no trailing newline).
std::string power_csv_header();
std::string to_csv_line(const PowerRow& row);

/// Declared tolerance of an approximation-check row.
struct Tolerance {
  enum class Kind { StdErrors, Relative };
  Kind kind = Kind::StdErrors;
  double value = 3.0;
};

/// Analytic value of the population MMD^2 against a large-sample Monte Carlo
/// estimate, over a dimension grid.
struct ApproximationConfig {
  std::string name = "approximation";
  AlternativeSpec scenario = GaussianMeanShift{};
  std::vector<Index> dims{1};
  KernelFamily kernel = KernelFamily::Gaussian;
  /// Fixed or d-power bandwidth, scaled by the scenario's sigma for "dpow".
  BandwidthRule bandwidth = PowerOfDimension{0.5, 1.0};
  Method method = Method::Exact;
  /// Only for Method::RegimeFormula; the bandwidth then follows the regime.
  Regime regime = Regime::GaussianObs2;
  double eps = 0.0;
  Index samples = 20000;
  Index replicates = 10;
  Tolerance tolerance{};
  std::uint64_t master_seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct ApproximationRow {
  std::string scenario;
  Index d = 0;
  double gamma = 0.0;
  double analytic = 0.0;
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
  /// (mc_estimate - analytic) / analytic.
  double rel_gap = 0.0;
  bool flagged = false;
};

/// Analytic value for one row; throws ConfigError when the scenario and
/// kernel have no closed form of the requested kind.
AnalyticPrediction approximation_value(const ApproximationConfig& cfg, Index d, double gamma);

std::vector<ApproximationRow> run_approximation_check(const ApproximationConfig& cfg);

std::string approximation_csv_header();
std::string to_csv_line(const ApproximationRow& row);

}  // namespace hdpower
