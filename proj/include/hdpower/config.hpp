#pragma once

#include "hdpower/io.hpp"
#include "hdpower/powerlab.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hdpower {

enum class ExperimentKind { Power, Calibration, Approximation };

std::string to_string(ExperimentKind kind);

/// A parsed experiment file. Layout:
///
///   [experiment]   kind = power | calibration | approximation
///                  name, output (CSV file name), seed
///   [scenario]     type = gaussian-mean | gaussian-mean-all | laplace-mean |
///                         gaussian-var | gaussian-dep
///                  dims = 1, 4, 16, ...   plus sigma, delta, tau, k, rho as the type allows;
///                  k may be a list, giving one power run per entry
///   [test]         statistics, kernel, bandwidths, metric, n, m, trials,
///                  permutations, alpha            (power and calibration)
///   [approximation] kernel, bandwidth, method, regime, eps, samples,
///                  replicates, tolerance          (approximation)
///
/// Unknown sections and keys, and keys that do not apply to the chosen
/// scenario type or experiment kind, are errors.
struct ExperimentFile {
  ExperimentKind kind = ExperimentKind::Power;
  std::string name;
  std::string output;
  /// One entry per scenario variant (several only when k is a list).
  std::vector<ExperimentConfig> power;
  ApproximationConfig approximation;
  /// Every setting after defaults are applied, as "section.key" -> value.
  std::vector<std::pair<std::string, std::string>> resolved;
};

/// Throws ConfigError listing every problem found.
ExperimentFile parse_experiment(std::string_view text, const std::string& source);
ExperimentFile load_experiment(const std::filesystem::path& path);

}  // namespace hdpower
