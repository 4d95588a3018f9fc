#pragma once

#include "hdpower/data_matrix.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <variant>

namespace hdpower {

enum class ShiftMode { FirstCoordinate, AllCoordinates };

/// P = N(0, sigma^2 I), Q = N(delta * e1, sigma^2 I) or N(delta * 1, sigma^2 I).
struct GaussianMeanShift {
  Index d = 1;
  double sigma = 1.0;
  double delta = 1.0;
  ShiftMode mode = ShiftMode::FirstCoordinate;
};

/// Products of univariate Laplace(0, sigma) against the same shifted by delta * e1.
/// Density (1/(2 sigma)) exp(-|x - mu| / sigma); variance 2 sigma^2.
struct LaplaceMeanShift {
  Index d = 1;
  double sigma = 1.0;
  double delta = 1.0;
};

/// P = N(0, diag(sigma^2, ..., sigma^2, tau^2)), Q = N(0, sigma^2 I).
struct GaussianDiffVariance {
  Index d = 1;
  double sigma = 1.0;
  double tau = 2.0;
};

/// X, Y standard normal in R^d with corr(X_i, Y_i) = rho for i < k, zero otherwise.
struct GaussianDependent {
  Index d = 4;
  Index k = 4;
  double rho = 0.5;
};

using AlternativeSpec =
    std::variant<GaussianMeanShift, LaplaceMeanShift, GaussianDiffVariance, GaussianDependent>;

void validate(const AlternativeSpec& spec);
Index dimension(const AlternativeSpec& spec);
/// Copy of `spec` at dimension d (other parameters unchanged).
AlternativeSpec with_dimension(const AlternativeSpec& spec, Index d);
bool is_two_sample(const AlternativeSpec& spec);
/// True when the spec describes P = Q (or independence).
bool is_null(const AlternativeSpec& spec);
/// Scenario id used in CSV output: gaussian-mean, gaussian-mean-all, laplace-mean,
/// gaussian-var, gaussian-dep-k<k>.
std::string scenario_id(const AlternativeSpec& spec);
/// Human-readable one-liner with every parameter.
std::string describe(const AlternativeSpec& spec);

struct Divergence {
  enum class Kind { KL, MI };
  Kind kind = Kind::KL;
  double value = 0.0;
};

/// KL(P || Q) for the two-sample variants, mutual information for GaussianDependent.
Divergence divergence(const AlternativeSpec& spec);

/// X ~ P^n, Y ~ Q^m. Throws ModeError for GaussianDependent.
std::pair<DataMatrix, DataMatrix> sample_two_sample(const AlternativeSpec& spec, Index n, Index m,
                                                    std::uint64_t seed);

/// n paired rows (X_i, Y_i) from the joint Gaussian.
std::pair<DataMatrix, DataMatrix> sample_joint(const GaussianDependent& spec, Index n,
                                               std::uint64_t seed);

/// 2d x 2d covariance of (X, Y).
Eigen::MatrixXd joint_covariance(const GaussianDependent& spec);

}  // namespace hdpower
