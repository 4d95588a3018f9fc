#include "hdpower/kernels.hpp"

#include "hdpower/error.hpp"
#include "hdpower/format.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace hdpower {

namespace {

using ConstRow = Eigen::Map<const Eigen::VectorXd>;

ConstRow as_vector(std::span<const double> v) {
  return ConstRow(v.data(), static_cast<Index>(v.size()));
}

double squared_l2(std::span<const double> x, std::span<const double> y) {
  return (as_vector(x) - as_vector(y)).squaredNorm();
}

double l1(std::span<const double> x, std::span<const double> y) {
  return (as_vector(x) - as_vector(y)).cwiseAbs().sum();
}

// Native distance of a kernel family: squared L2 for Gaussian, L1 for Laplace.
double native_distance(KernelFamily family, std::span<const double> x,
                       std::span<const double> y) {
  return family == KernelFamily::Gaussian ? squared_l2(x, y) : l1(x, y);
}

double profile(KernelFamily family, double native, double gamma) {
  return family == KernelFamily::Gaussian ? std::exp(-native / (gamma * gamma))
                                          : std::exp(-native / gamma);
}

template <typename F>
Eigen::MatrixXd pairwise(const DataMatrix& x, const DataMatrix& y, F&& f) {
  require_same_dimension(x, y);
  Eigen::MatrixXd out(x.n(), y.n());
  for (Index j = 0; j < y.n(); ++j) {
    const auto yj = y.row(j);
    for (Index i = 0; i < x.n(); ++i) out(i, j) = f(x.row(i), yj);
  }
  return out;
}

// Fills the strict upper triangle and mirrors it; diagonal is set to `diag`.
template <typename F>
Eigen::MatrixXd pairwise_symmetric(const DataMatrix& x, double diag, F&& f) {
  const Index n = x.n();
  Eigen::MatrixXd out(n, n);
  for (Index j = 0; j < n; ++j) {
    const auto xj = x.row(j);
    for (Index i = 0; i < j; ++i) {
      const double v = f(x.row(i), xj);
      out(i, j) = v;
      out(j, i) = v;
    }
    out(j, j) = diag;
  }
  return out;
}

}  // namespace

KernelSpec KernelSpec::gaussian(double gamma) {
  KernelSpec spec{KernelFamily::Gaussian, gamma};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::laplace(double gamma) {
  KernelSpec spec{KernelFamily::Laplace, gamma};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InputError("kernel bandwidth must be positive and finite, got " +
                     format_double(bandwidth));
  }
}

void validate(const BandwidthRule& rule) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) {
    if (!(fixed->gamma > 0.0) || !std::isfinite(fixed->gamma)) {
      throw InputError("fixed bandwidth must be positive, got " + format_double(fixed->gamma));
    }
  } else if (const auto* pow = std::get_if<PowerOfDimension>(&rule)) {
    if (!(pow->scale > 0.0) || !std::isfinite(pow->scale)) {
      throw InputError("power-of-dimension scale must be positive, got " +
                       format_double(pow->scale));
    }
    if (!std::isfinite(pow->exponent)) throw InputError("power-of-dimension exponent not finite");
  }
}

std::string to_string(const BandwidthRule& rule) {
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) {
    return "fixed:" + format_double(fixed->gamma);
  }
  if (const auto* pow = std::get_if<PowerOfDimension>(&rule)) {
    std::string s = "dpow:" + format_double(pow->exponent);
    if (pow->scale != 1.0) s += ":" + format_double(pow->scale);
    return s;
  }
  return "median";
}

BandwidthRule parse_bandwidth_rule(std::string_view text) {
  text = trim(text);
  const auto parts = split(text, ':');
  BandwidthRule rule;
  if (parts.size() == 1 && parts[0] == "median") {
    rule = MedianHeuristic{};
  } else if (parts.size() == 2 && parts[0] == "fixed") {
    rule = FixedBandwidth{parse_double(parts[1], "fixed bandwidth")};
  } else if ((parts.size() == 2 || parts.size() == 3) && parts[0] == "dpow") {
    PowerOfDimension pow{parse_double(parts[1], "bandwidth exponent"), 1.0};
    if (parts.size() == 3) pow.scale = parse_double(parts[2], "bandwidth scale");
    rule = pow;
  } else {
    throw InputError("unknown bandwidth rule '" + std::string(text) +
                     "' (expected median, fixed:<gamma> or dpow:<alpha>[:<scale>])");
  }
  validate(rule);
  return rule;
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Gaussian ? "gaussian" : "laplace";
}

KernelFamily parse_kernel_family(std::string_view text) {
  text = trim(text);
  if (text == "gaussian") return KernelFamily::Gaussian;
  if (text == "laplace") return KernelFamily::Laplace;
  throw InputError("unknown kernel '" + std::string(text) + "' (expected gaussian or laplace)");
}

std::string to_string(DistanceMetric metric) { return metric == DistanceMetric::L2 ? "l2" : "l1"; }

DistanceMetric parse_distance_metric(std::string_view text) {
  text = trim(text);
  if (text == "l2") return DistanceMetric::L2;
  if (text == "l1") return DistanceMetric::L1;
  throw InputError("unknown metric '" + std::string(text) + "' (expected l2 or l1)");
}

double kernel_eval(std::span<const double> x, std::span<const double> y, const KernelSpec& spec) {
  spec.validate();
  if (x.size() != y.size()) {
    throw InputError("kernel arguments differ in dimension: " + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()));
  }
  return profile(spec.family, native_distance(spec.family, x, y), spec.bandwidth);
}

Eigen::MatrixXd gram_matrix(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec) {
  spec.validate();
  return pairwise(x, y, [&](auto a, auto b) {
    return profile(spec.family, native_distance(spec.family, a, b), spec.bandwidth);
  });
}

Eigen::MatrixXd gram_matrix(const DataMatrix& x, const KernelSpec& spec) {
  spec.validate();
  return pairwise_symmetric(x, 1.0, [&](auto a, auto b) {
    return profile(spec.family, native_distance(spec.family, a, b), spec.bandwidth);
  });
}

Eigen::MatrixXd distance_matrix(const DataMatrix& x, const DataMatrix& y, DistanceMetric metric) {
  if (metric == DistanceMetric::L1) return pairwise(x, y, l1);
  return pairwise(x, y, [](auto a, auto b) { return std::sqrt(squared_l2(a, b)); });
}

Eigen::MatrixXd distance_matrix(const DataMatrix& x, DistanceMetric metric) {
  if (metric == DistanceMetric::L1) return pairwise_symmetric(x, 0.0, l1);
  return pairwise_symmetric(x, 0.0, [](auto a, auto b) { return std::sqrt(squared_l2(a, b)); });
}

Eigen::MatrixXd squared_distance_matrix(const DataMatrix& x) {
  return pairwise_symmetric(x, 0.0, squared_l2);
}

Eigen::MatrixXd kernel_from_distances(const Eigen::MatrixXd& native, const KernelSpec& spec) {
  spec.validate();
  const double scale = spec.family == KernelFamily::Gaussian
                           ? 1.0 / (spec.bandwidth * spec.bandwidth)
                           : 1.0 / spec.bandwidth;
  return (native.array() * -scale).exp().matrix();
}

double median_from_squared_distances(const Eigen::MatrixXd& squared) {
  const Index n = squared.rows();
  if (n < 2 || squared.cols() != n) {
    throw InsufficientSampleError("median heuristic needs at least two points");
  }
  std::vector<double> pairs;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) pairs.push_back(squared(i, j));
  }
  const std::size_t mid = pairs.size() / 2;
  std::nth_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid), pairs.end());
  double median = std::sqrt(pairs[mid]);
  if (pairs.size() % 2 == 0) {
    const double below =
        *std::max_element(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (std::sqrt(below) + median);
  }
  if (!(median > 0.0)) {
    throw DegenerateDataError(
        "median pairwise distance is zero (identical points); bandwidth would be 0");
  }
  return median;
}

double median_heuristic(const DataMatrix& pooled) {
  if (pooled.n() < 2) throw InsufficientSampleError("median heuristic needs at least two points");
  return median_from_squared_distances(squared_distance_matrix(pooled));
}

double resolve_bandwidth(const BandwidthRule& rule, const DataMatrix& pooled) {
  validate(rule);
  if (const auto* fixed = std::get_if<FixedBandwidth>(&rule)) return fixed->gamma;
  if (const auto* pow = std::get_if<PowerOfDimension>(&rule)) {
    const double gamma = pow->scale * std::pow(static_cast<double>(pooled.d()), pow->exponent);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InputError("resolved bandwidth is not a positive finite number");
    }
    return gamma;
  }
  return median_heuristic(pooled);
}

}  // namespace hdpower
