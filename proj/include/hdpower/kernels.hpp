#pragma once

#include "hdpower/data_matrix.hpp"

#include <span>
#include <string>
#include <string_view>
#include <variant>

namespace hdpower {

enum class KernelFamily { Gaussian, Laplace };

/// Translation-invariant kernel with bandwidth gamma > 0.
///
///   Gaussian: k(x, y) = exp(-||x - y||_2^2 / gamma^2)
///   Laplace:  k(x, y) = exp(-||x - y||_1 / gamma)
///
/// The Laplace kernel uses the L1 norm so that it factorizes over coordinates.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;

  static KernelSpec gaussian(double gamma);
  static KernelSpec laplace(double gamma);
  void validate() const;
};

enum class DistanceMetric { L2, L1 };

struct FixedBandwidth {
  double gamma = 1.0;
};

/// Median of all pairwise L2 distances of the pooled sample.
struct MedianHeuristic {};

/// gamma = scale * d^exponent.
struct PowerOfDimension {
  double exponent = 0.0;
  double scale = 1.0;
};

using BandwidthRule = std::variant<FixedBandwidth, MedianHeuristic, PowerOfDimension>;

void validate(const BandwidthRule& rule);

/// Round-trips with parse_bandwidth_rule: "median", "fixed:<g>", "dpow:<alpha>[:<scale>]".
std::string to_string(const BandwidthRule& rule);
BandwidthRule parse_bandwidth_rule(std::string_view text);

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view text);
std::string to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(std::string_view text);

double kernel_eval(std::span<const double> x, std::span<const double> y, const KernelSpec& spec);

/// X.n x Y.n matrix of k(x_i, y_j).
Eigen::MatrixXd gram_matrix(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec);
/// Symmetric Gram matrix of a sample with itself; the diagonal is exactly 1.
Eigen::MatrixXd gram_matrix(const DataMatrix& x, const KernelSpec& spec);

Eigen::MatrixXd distance_matrix(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric);
/// Symmetric, zero diagonal.
Eigen::MatrixXd distance_matrix(const DataMatrix& x, DistanceMetric metric);

/// Pairwise squared L2 distances of a sample with itself (symmetric, zero diagonal).
Eigen::MatrixXd squared_distance_matrix(const DataMatrix& x);

/// Applies the kernel profile to a matrix of the family's native distances
/// (squared L2 for Gaussian, L1 for Laplace).
Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& native, const KernelSpec& spec);

/// Median over the n(n-1)/2 unordered pairs i < j of ||p_i - p_j||_2.
/// Even pair counts average the two middle order statistics.
double median_heuristic(const DataMatrix& pooled);

/// Same median computed from a precomputed symmetric squared-distance matrix.
double median_from_squared_distances(const Eigen::MatrixXd& squared);

double resolve_bandwidth(const BandwidthRule& rule, const DataMatrix& pooled);

}  // namespace hdpower
